#include "ebnm/ebnm.hpp"

#include <variant>

namespace ebnm {

namespace {

std::optional<double> fixed_scale(const ScaleSpec& scale) {
  if (const auto* v = std::get_if<double>(&scale)) return *v;
  if (const auto* g = std::get_if<std::vector<double>>(&scale)) return g->front();
  return std::nullopt;
}

std::optional<ParametricPrior> parametric_init(const PriorFamilySpec& spec) {
  if (spec.g_init && spec.g_init->is_parametric()) return spec.g_init->parametric();
  return std::nullopt;
}

}  // namespace

PriorFit fit_prior(const ObservationSet& obs, const PriorFamilySpec& spec) {
  spec.validate();
  if (spec.fix_g) return {*spec.g_init, log_likelihood(obs, *spec.g_init), std::nullopt};

  const auto scale = fixed_scale(spec.scale);
  const auto init = parametric_init(spec);
  ParametricFit pf;
  switch (spec.family) {
    case Family::normal:
      pf = fit_normal(obs, spec.mode, NormalFitMethod::automatic, scale);
      break;
    case Family::point_normal:
      pf = fit_point_normal(obs, spec.mode, scale, init);
      break;
    case Family::point_laplace:
      pf = fit_point_laplace(obs, spec.mode, scale, init);
      break;
    case Family::point_exponential:
      pf = fit_point_exponential(obs, spec.mode, scale, init);
      break;
    default: {
      auto mf = fit_nonparametric(obs, spec);
      return {FittedPrior{spec.family, std::move(mf.prior)}, mf.log_likelihood, mf.cert};
    }
  }
  return {FittedPrior{spec.family, pf.prior}, pf.log_likelihood, std::nullopt};
}

EbnmResult solve(const ObservationSet& obs, const PriorFamilySpec& spec, std::uint64_t sampler_seed) {
  auto fit = fit_prior(obs, spec);
  auto summary = posterior_summary(obs, fit.prior);
  PosteriorSampler sampler(obs, fit.prior, sampler_seed);
  return {std::move(fit.prior), fit.log_likelihood, std::move(summary), std::move(sampler), fit.kkt};
}

}  // namespace ebnm
