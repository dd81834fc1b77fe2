#include "ebnm/param_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ebnm/error.hpp"
#include "ebnm/kernels.hpp"
#include "ebnm/numerics.hpp"

namespace ebnm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundaryPi0 = 1.0 - 1e-6;
constexpr double kBoundaryGain = 1e-6;

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

struct SlabEval {
  double log_density;
  double d_scale;  // derivative with respect to the slab scale
  double d_mode;   // derivative with respect to mu
};

SlabEval eval_slab(SlabKind kind, double x, double s, double mu, double scale) {
  const double z = x - mu;
  switch (kind) {
    case SlabKind::normal: {
      const double v = scale + s * s;
      return {kernels::log_marginal_normal(x, s, mu, scale), 0.5 * (z * z / (v * v) - 1.0 / v), z / v};
    }
    case SlabKind::laplace: {
      const double a = scale;
      const double t1 = kernels::exp_branch_log_term(z, s, a);
      const double t2 = kernels::exp_branch_log_term(-z, s, a);
      const double lse = num::log_add_exp(t1, t2);
      const double p1 = std::exp(t1 - lse);
      const double p2 = std::exp(t2 - lse);
      const double lam1 = num::inv_mills(z / s - a * s);
      const double lam2 = num::inv_mills(-z / s - a * s);
      const double dt1_da = a * s * s - z - s * lam1;
      const double dt2_da = a * s * s + z - s * lam2;
      const double dt1_dz = -a + lam1 / s;
      const double dt2_dz = a - lam2 / s;
      return {std::log(0.5 * a) + lse, 1.0 / a + p1 * dt1_da + p2 * dt2_da,
              -(p1 * dt1_dz + p2 * dt2_dz)};
    }
    case SlabKind::exponential: {
      const double a = scale;
      const double lam = num::inv_mills(z / s - a * s);
      return {std::log(a) + kernels::exp_branch_log_term(z, s, a), 1.0 / a + a * s * s - z - s * lam,
              a - lam / s};
    }
  }
  return {};
}

double slab_second_moment_to_scale(SlabKind kind, double m2) {
  if (kind == SlabKind::normal) return m2;
  return std::sqrt(2.0 / m2);  // E[theta^2] = 2 / a^2 for Laplace and exponential slabs
}

double point_log_likelihood(const ObservationSet& obs, double mu) {
  double ll = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) ll += kernels::log_marginal_point(obs.x()[i], obs.s()[i], mu);
  return ll;
}

// Second moment of theta about mu implied by the data, floored away from zero.
double moment_matched_m2(const ObservationSet& obs, double mu) {
  double acc = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double z = obs.x()[i] - mu;
    acc += z * z - obs.s()[i] * obs.s()[i];
    s2 += obs.s()[i] * obs.s()[i];
  }
  const double n = static_cast<double>(obs.size());
  return std::max(acc / n, 1e-2 * s2 / n);
}

struct Candidate {
  ParametricPrior prior;
  double log_likelihood;
  int iterations;
};

ParametricFit finish(const ObservationSet& obs, SlabKind slab, const Candidate& delta,
                     const std::vector<Candidate>& others) {
  const Candidate* best = &delta;
  for (const auto& c : others)
    if (c.log_likelihood > best->log_likelihood) best = &c;
  Candidate chosen = *best;
  if (best != &delta) {
    const bool near_spike = chosen.prior.pi0 > kBoundaryPi0;
    const bool no_gain = chosen.log_likelihood - delta.log_likelihood < kBoundaryGain;
    if (near_spike || no_gain) chosen = delta;
  }
  ParametricPrior g = make_parametric(chosen.prior.mu, chosen.prior.pi0, chosen.prior.scale);
  return {g, spike_slab_log_likelihood(obs, slab, g), chosen.iterations};
}

Candidate from_result(const SpikeSlabObjective& f, const opt::Result& r) {
  return {f.to_prior(r.params), -r.value, r.iterations};
}

ParametricFit fit_spike_slab(const ObservationSet& obs, SlabKind slab, Mode mode,
                             std::optional<double> fixed_scale,
                             const std::optional<ParametricPrior>& init) {
  const double mu_start = mode.is_estimate() ? weighted_median(obs) : mode.value();
  const double mu_delta = point_mass_mode(obs, mode);
  const Candidate delta{{mu_delta, 1.0, 0.0}, point_log_likelihood(obs, mu_delta), 0};

  const double m2 = moment_matched_m2(obs, mu_start);
  std::vector<TransformedParams> starts;
  for (double pi0 : {0.5, 0.95}) {
    const double w = 1.0 - pi0;
    const double scale = fixed_scale ? *fixed_scale : slab_second_moment_to_scale(slab, m2 / w);
    starts.push_back({std::log(w / pi0), std::log(scale), mu_start});
  }
  if (init && !init->is_point_mass() && init->pi0 > 0.0 && init->pi0 < 1.0) {
    starts.push_back({std::log((1.0 - init->pi0) / init->pi0),
                      std::log(fixed_scale ? *fixed_scale : init->scale),
                      mode.is_estimate() ? init->mu : mode.value()});
  }

  ParamLayout layout;
  layout.free_alpha = true;
  layout.free_beta = !fixed_scale;
  layout.free_gamma = mode.is_estimate();
  layout.fixed = {0.0, fixed_scale ? std::log(*fixed_scale) : 0.0, mode.value()};
  const SpikeSlabObjective spike_slab(obs, slab, layout);

  ParamLayout slab_layout = layout;
  slab_layout.free_alpha = false;
  slab_layout.fixed.alpha = kInf;
  const SpikeSlabObjective slab_only(obs, slab, slab_layout);

  std::vector<Eigen::VectorXd> packed, packed_slab;
  for (const auto& t : starts) {
    packed.push_back(layout.pack(t));
    TransformedParams ts = t;
    ts.beta = std::log(fixed_scale ? *fixed_scale : slab_second_moment_to_scale(slab, m2));
    packed_slab.push_back(slab_layout.pack(ts));
  }

  std::vector<Candidate> candidates;
  candidates.push_back(from_result(spike_slab, opt::minimize_multistart(spike_slab, packed)));
  candidates.push_back(from_result(slab_only, opt::minimize_multistart(slab_only, packed_slab)));
  return finish(obs, slab, delta, candidates);
}

}  // namespace

Eigen::VectorXd ParamLayout::pack(const TransformedParams& t) const {
  Eigen::VectorXd v(dim());
  Eigen::Index k = 0;
  if (free_alpha) v[k++] = t.alpha;
  if (free_beta) v[k++] = t.beta;
  if (free_gamma) v[k++] = t.gamma;
  return v;
}

TransformedParams ParamLayout::unpack(const Eigen::VectorXd& v) const {
  TransformedParams t = fixed;
  Eigen::Index k = 0;
  if (free_alpha) t.alpha = v[k++];
  if (free_beta) t.beta = v[k++];
  if (free_gamma) t.gamma = v[k++];
  return t;
}

SpikeSlabObjective::SpikeSlabObjective(const ObservationSet& obs, SlabKind slab, ParamLayout layout)
    : obs_(&obs), slab_(slab), layout_(layout) {}

ParametricPrior SpikeSlabObjective::to_prior(const Eigen::VectorXd& p) const {
  const auto t = layout_.unpack(p);
  const double pi0 = t.alpha == kInf ? 0.0 : std::exp(-softplus(t.alpha));
  return {t.gamma, pi0, std::exp(t.beta)};
}

double SpikeSlabObjective::operator()(const Eigen::VectorXd& p, Eigen::VectorXd* grad) const {
  const auto t = layout_.unpack(p);
  const double scale = std::exp(t.beta);
  const double mu = t.gamma;
  const bool pure_slab = t.alpha == kInf;
  const double log_w = pure_slab ? 0.0 : -softplus(-t.alpha);
  const double log_pi0 = pure_slab ? -kInf : -softplus(t.alpha);
  const double w = std::exp(log_w);

  const auto& x = obs_->x();
  const auto& s = obs_->s();
  double ll = 0.0, ga = 0.0, gb = 0.0, gg = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const SlabEval se = eval_slab(slab_, x[i], s[i], mu, scale);
    double lli, r1;
    if (pure_slab) {
      lli = se.log_density;
      r1 = 1.0;
    } else {
      const double lp0 = kernels::log_marginal_point(x[i], s[i], mu);
      lli = num::log_add_exp(log_pi0 + lp0, log_w + se.log_density);
      r1 = std::exp(log_w + se.log_density - lli);
    }
    ll += lli;
    if (grad) {
      ga += r1 - w;
      gb += r1 * se.d_scale * scale;
      gg += (1.0 - r1) * (x[i] - mu) / (s[i] * s[i]) + r1 * se.d_mode;
    }
  }
  if (grad) {
    grad->resize(layout_.dim());
    Eigen::Index k = 0;
    if (layout_.free_alpha) (*grad)[k++] = -ga;
    if (layout_.free_beta) (*grad)[k++] = -gb;
    if (layout_.free_gamma) (*grad)[k++] = -gg;
  }
  return std::isnan(ll) ? kInf : -ll;
}

double weighted_median(const ObservationSet& obs) {
  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return obs.x()[a] < obs.x()[b]; });
  double total = 0.0;
  for (double si : obs.s()) total += 1.0 / (si * si);
  double acc = 0.0;
  for (auto i : order) {
    acc += 1.0 / (obs.s()[i] * obs.s()[i]);
    if (acc >= 0.5 * total) return obs.x()[i];
  }
  return obs.x()[order.back()];
}

double point_mass_mode(const ObservationSet& obs, Mode mode) {
  if (!mode.is_estimate()) return mode.value();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double prec = 1.0 / (obs.s()[i] * obs.s()[i]);
    num += prec * obs.x()[i];
    den += prec;
  }
  return num / den;
}

double spike_slab_log_likelihood(const ObservationSet& obs, SlabKind slab, const ParametricPrior& g) {
  if (g.is_point_mass()) return point_log_likelihood(obs, g.mu);
  double ll = 0.0;
  const double log_pi0 = g.pi0 > 0.0 ? std::log(g.pi0) : -kInf;
  const double log_w = std::log1p(-g.pi0);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double lp1 = eval_slab(slab, obs.x()[i], obs.s()[i], g.mu, g.scale).log_density;
    const double lp0 = kernels::log_marginal_point(obs.x()[i], obs.s()[i], g.mu);
    ll += num::log_add_exp(log_pi0 + lp0, log_w + lp1);
  }
  return ll;
}

ParametricFit fit_normal(const ObservationSet& obs, Mode mode, NormalFitMethod method,
                         std::optional<double> fixed_variance) {
  const double n = static_cast<double>(obs.size());
  const bool closed_form = method == NormalFitMethod::automatic && obs.homoskedastic();

  if (fixed_variance && !mode.is_estimate()) {
    const auto g = make_parametric(mode.value(), 0.0, *fixed_variance);
    return {g, spike_slab_log_likelihood(obs, SlabKind::normal, g), 0};
  }

  if (closed_form) {
    double mu = mode.value();
    if (mode.is_estimate()) mu = std::accumulate(obs.x().begin(), obs.x().end(), 0.0) / n;
    double var = 0.0;
    if (fixed_variance) {
      var = *fixed_variance;
    } else {
      double ss = 0.0;
      for (double xi : obs.x()) ss += (xi - mu) * (xi - mu);
      const double s = obs.s().front();
      var = std::max(0.0, ss / n - s * s);
    }
    const auto g = make_parametric(mu, 0.0, var);
    return {g, spike_slab_log_likelihood(obs, SlabKind::normal, g), 0};
  }

  const double mu_start = mode.is_estimate() ? point_mass_mode(obs, mode) : mode.value();
  const double mu_delta = point_mass_mode(obs, mode);
  const Candidate delta{{mu_delta, 1.0, 0.0}, point_log_likelihood(obs, mu_delta), 0};

  ParamLayout layout;
  layout.free_alpha = false;
  layout.free_beta = !fixed_variance;
  layout.free_gamma = mode.is_estimate();
  layout.fixed = {kInf, fixed_variance ? std::log(*fixed_variance) : 0.0, mode.value()};
  const SpikeSlabObjective f(obs, SlabKind::normal, layout);

  const double beta0 = std::log(moment_matched_m2(obs, mu_start));
  std::vector<Eigen::VectorXd> starts{layout.pack({kInf, beta0, mu_start})};
  const auto r = opt::minimize_multistart(f, starts);
  auto cand = from_result(f, r);
  cand.prior.pi0 = 0.0;
  return finish(obs, SlabKind::normal, delta, {cand});
}

ParametricFit fit_point_normal(const ObservationSet& obs, Mode mode, std::optional<double> fixed_scale,
                               const std::optional<ParametricPrior>& init) {
  return fit_spike_slab(obs, SlabKind::normal, mode, fixed_scale, init);
}

ParametricFit fit_point_laplace(const ObservationSet& obs, Mode mode, std::optional<double> fixed_scale,
                                const std::optional<ParametricPrior>& init) {
  return fit_spike_slab(obs, SlabKind::laplace, mode, fixed_scale, init);
}

ParametricFit fit_point_exponential(const ObservationSet& obs, Mode mode,
                                    std::optional<double> fixed_scale,
                                    const std::optional<ParametricPrior>& init) {
  if (mode.is_estimate()) throw DataError("point_exponential requires a fixed mode");
  return fit_spike_slab(obs, SlabKind::exponential, mode, fixed_scale, init);
}

}  // namespace ebnm
