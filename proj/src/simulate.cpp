#include "ebnm/bench.hpp"

#include <cmath>
#include <random>

#include "ebnm/error.hpp"
#include "ebnm/numerics.hpp"

namespace ebnm {

namespace {

double unit_uniform(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

double std_normal(std::mt19937_64& rng) { return num::norm_quantile(unit_uniform(rng)); }

// Student t via Z / sqrt(chi2_df / df).
double student_t(std::mt19937_64& rng, int df) {
  const double z = std_normal(rng);
  double chi2 = 0.0;
  for (int k = 0; k < df; ++k) {
    const double e = std_normal(rng);
    chi2 += e * e;
  }
  return z / std::sqrt(chi2 / df);
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::point_normal: return "point-normal";
    case Scenario::point_t: return "point-t";
    case Scenario::tophat: return "tophat";
  }
  return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
  for (auto s : {Scenario::point_normal, Scenario::point_t, Scenario::tophat})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

SimulationTruth simulate_scenario(Scenario scenario, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DataError("simulation needs n >= 1");
  std::mt19937_64 rng(seed);
  SimulationTruth t{{}, {}, std::vector<double>(n, 1.0), scenario, seed};
  t.theta.reserve(n);
  t.x.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = unit_uniform(rng);
    double theta = 0.0;
    switch (scenario) {
      case Scenario::point_normal:
        if (u >= 0.9) theta = 2.0 * std_normal(rng);
        break;
      case Scenario::point_t:
        if (u >= 0.8) theta = 1.5 * student_t(rng, 5);
        break;
      case Scenario::tophat:
        if (u >= 0.5) theta = -5.0 + 15.0 * unit_uniform(rng);
        break;
    }
    t.theta.push_back(theta);
    t.x.push_back(theta + std_normal(rng));
  }
  return t;
}

}  // namespace ebnm
