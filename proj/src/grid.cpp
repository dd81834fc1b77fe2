#include "ebnm/mix_fit.hpp"

#include <algorithm>
#include <cmath>

#include "ebnm/error.hpp"

namespace ebnm {

namespace {

constexpr double kRatio = 1.4142135623730951;

std::vector<double> default_scales(const ObservationSet& obs, double mode) {
  double max_excess = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double z = obs.x()[i] - mode;
    max_excess = std::max(max_excess, z * z - obs.s()[i] * obs.s()[i]);
  }
  const double lo = obs.min_s() / 10.0;
  const double hi = std::max(2.0 * std::sqrt(max_excess), 2.0 * lo);
  return geometric_scale_grid(lo, hi);
}

MixturePrior uniform_weights(MixtureKind kind, std::vector<Component> comps) {
  const double w = 1.0 / static_cast<double>(comps.size());
  std::vector<double> weights(comps.size(), w);
  // Re-normalize so that the 1e-12 simplex check holds for any K.
  double total = 0.0;
  for (double v : weights) total += v;
  for (double& v : weights) v /= total;
  return make_mixture(kind, std::move(comps), std::move(weights));
}

}  // namespace

std::vector<double> geometric_scale_grid(double lo, double hi) {
  std::vector<double> grid{lo};
  while (grid.back() < hi) grid.push_back(grid.back() * kRatio);
  return grid;
}

int npmle_grid_size(std::size_t n, double range, double min_s) {
  if (range <= 0.0) return 1;
  const double raw = std::pow(static_cast<double>(n), 0.25) * range / (4.0 * min_s);
  const double k = std::ceil(raw - 1e-9);
  return static_cast<int>(std::clamp(k, 2.0, 300.0));
}

MixturePrior build_grid(const PriorFamilySpec& spec, const ObservationSet& obs) {
  const double mu = spec.mode.value();
  const auto* user = std::get_if<std::vector<double>>(&spec.scale);
  const auto* user_scalar = std::get_if<double>(&spec.scale);

  if (spec.family == Family::npmle) {
    const auto [lo_it, hi_it] = std::minmax_element(obs.x().begin(), obs.x().end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<Component> comps;
    if (user && user->size() > 1) {
      for (double loc : *user) comps.push_back(PointMass{loc});
    } else {
      int k = npmle_grid_size(obs.size(), hi - lo, obs.min_s());
      const double spacing = user ? user->front() : (user_scalar ? *user_scalar : 0.0);
      if (spacing > 0.0) k = std::max(1, static_cast<int>(std::ceil((hi - lo) / spacing - 1e-9)) + 1);
      if (k == 1) {
        comps.push_back(PointMass{lo});
      } else {
        for (int j = 0; j < k; ++j) {
          const double t = static_cast<double>(j) / (k - 1);
          comps.push_back(PointMass{j == k - 1 ? hi : lo + t * (hi - lo)});
        }
      }
    }
    return uniform_weights(MixtureKind::point_mass, std::move(comps));
  }

  std::vector<double> scales;
  if (user) {
    scales = *user;
  } else if (user_scalar) {
    scales = {*user_scalar};
  } else {
    scales = default_scales(obs, mu);
  }
  std::sort(scales.begin(), scales.end());
  scales.erase(std::unique(scales.begin(), scales.end()), scales.end());

  std::vector<Component> comps;
  switch (spec.family) {
    case Family::normal_scale_mixture: {
      if (!user && !user_scalar) comps.push_back(NormalComponent{mu, 0.0});
      for (double sd : scales) comps.push_back(NormalComponent{mu, sd * sd});
      return uniform_weights(MixtureKind::zero_mean_normal, std::move(comps));
    }
    case Family::unimodal_symmetric:
    case Family::unimodal:
    case Family::unimodal_nonnegative:
    case Family::unimodal_nonpositive: {
      const bool neg = spec.family != Family::unimodal_nonnegative;
      const bool pos = spec.family != Family::unimodal_nonpositive;
      const bool symmetric = spec.family == Family::unimodal_symmetric;
      comps.push_back(UniformComponent{mu, mu});
      for (double a : scales) {
        if (a == 0.0) continue;
        if (symmetric) {
          comps.push_back(UniformComponent{mu - a, mu + a});
          continue;
        }
        if (neg) comps.push_back(UniformComponent{mu - a, mu});
        if (pos) comps.push_back(UniformComponent{mu, mu + a});
      }
      return uniform_weights(MixtureKind::uniform, std::move(comps));
    }
    default:
      throw DataError("build_grid called for parametric family " + std::string(to_string(spec.family)));
  }
}

}  // namespace ebnm
