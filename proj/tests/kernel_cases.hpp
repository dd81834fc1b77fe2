#pragma once

// Randomized kernel test cases shared by the unit and acceptance suites.

#include <cmath>
#include <random>
#include <vector>

#include "ebnm/prior.hpp"
#include "quadrature_oracle.hpp"

namespace cases {

struct KernelCase {
  double x, s;
  ebnm::Component component;
  std::vector<double> par;  // oracle parameters, kept alive with the case
};

enum class Kind { point, normal, laplace, exponential, uniform };

inline const char* name(Kind k) {
  switch (k) {
    case Kind::point: return "point";
    case Kind::normal: return "normal";
    case Kind::laplace: return "laplace";
    case Kind::exponential: return "exponential";
    case Kind::uniform: return "uniform";
  }
  return "?";
}

/// Roughly a quarter of the cases put x 8 to 50 standard errors away from
/// the component location.
inline std::vector<KernelCase> random_cases(Kind kind, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<KernelCase> out;
  for (int i = 0; i < count; ++i) {
    const double s = std::exp(-1.5 + 3.0 * u(rng));
    const double mu = (kind == Kind::exponential) ? 0.0 : -3.0 + 6.0 * u(rng);
    const bool tail = u(rng) < 0.25;
    const double sign = u(rng) < 0.5 ? -1.0 : 1.0;
    const double offset = tail ? sign * (8.0 + 42.0 * u(rng)) * s : (-4.0 + 8.0 * u(rng)) * s;
    KernelCase c{mu + offset, s, ebnm::PointMass{mu}, {}};
    switch (kind) {
      case Kind::point:
        break;
      case Kind::normal: {
        const double var = std::exp(-3.0 + 5.0 * u(rng));
        c.component = ebnm::NormalComponent{mu, var};
        break;
      }
      case Kind::laplace: {
        const double a = std::exp(-2.0 + 3.5 * u(rng));
        c.component = ebnm::LaplaceSlab{mu, a};
        break;
      }
      case Kind::exponential: {
        const double a = std::exp(-2.0 + 3.5 * u(rng));
        c.component = ebnm::ExponentialSlab{0.0, a};
        break;
      }
      case Kind::uniform: {
        const double w = std::exp(-2.0 + 4.0 * u(rng));
        const double l = mu - w * u(rng);
        c.component = ebnm::UniformComponent{l, l + w};
        break;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

/// Oracle moments for a case.
inline oracle::Moments quadrature(KernelCase& c) {
  using oracle::Piece;
  std::vector<Piece> pieces;
  if (const auto* p = std::get_if<ebnm::PointMass>(&c.component)) {
    pieces.push_back({p->location, p->location, nullptr, nullptr, 0.0});
  } else if (const auto* n = std::get_if<ebnm::NormalComponent>(&c.component)) {
    c.par = {n->mean, n->variance};
    pieces.push_back({-oracle::kInf, oracle::kInf, oracle::normal_density, c.par.data()});
  } else if (const auto* l = std::get_if<ebnm::LaplaceSlab>(&c.component)) {
    c.par = {l->mean, l->rate};
    pieces.push_back({-oracle::kInf, l->mean, oracle::laplace_density, c.par.data()});
    pieces.push_back({l->mean, oracle::kInf, oracle::laplace_density, c.par.data()});
  } else if (const auto* e = std::get_if<ebnm::ExponentialSlab>(&c.component)) {
    c.par = {e->origin, e->rate};
    pieces.push_back({e->origin, oracle::kInf, oracle::exp_density, c.par.data()});
  } else {
    const auto& un = std::get<ebnm::UniformComponent>(c.component);
    c.par = {un.lower, un.upper};
    pieces.push_back({un.lower, un.upper, oracle::uniform_density, c.par.data()});
  }
  return oracle::posterior_by_quadrature(c.x, c.s, pieces);
}

}  // namespace cases
