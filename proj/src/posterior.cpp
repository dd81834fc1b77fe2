#include "ebnm/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ebnm/error.hpp"
#include "ebnm/kernels.hpp"
#include "ebnm/numerics.hpp"

namespace ebnm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Responsibilities {
  std::vector<double> log_resp;  // normalized
  double log_marginal;
};

Responsibilities responsibilities(double x, double s, const std::vector<WeightedComponent>& comps) {
  Responsibilities r;
  r.log_resp.resize(comps.size());
  for (std::size_t k = 0; k < comps.size(); ++k)
    r.log_resp[k] = std::log(comps[k].weight) + kernels::log_marginal(x, s, comps[k].component);
  r.log_marginal = num::log_sum_exp(r.log_resp);
  for (double& v : r.log_resp) v -= r.log_marginal;
  return r;
}

using Piece = PosteriorSampler::Piece;

Piece point_piece(double v) { return {Piece::Kind::point, 0.0, v, 0.0, 0.0, 0.0, 0.0, 0.0, false}; }

Piece normal_piece(double mean, double sd) {
  return {Piece::Kind::normal, 0.0, mean, sd, 0.0, 0.0, 0.0, 0.0, false};
}

Piece truncated_piece(double m, double s, double l, double r) {
  if (l == r) return point_piece(l);
  double a = (l - m) / s;
  double b = (r - m) / s;
  const bool flip = a > -b;
  if (flip) {
    const double t = a;
    a = -b;
    b = -t;
  }
  return {Piece::Kind::truncated, 0.0, m, s, a, b, num::log_norm_cdf(a), num::log_diff_norm_cdf(a, b), flip};
}

// Appends the posterior pieces of one component with total log weight lw.
void append_pieces(double x, double s, const Component& c, double lw, std::vector<std::pair<double, Piece>>& out) {
  if (const auto* p = std::get_if<PointMass>(&c)) {
    out.emplace_back(lw, point_piece(p->location));
  } else if (const auto* n = std::get_if<NormalComponent>(&c)) {
    if (n->variance == 0.0) {
      out.emplace_back(lw, point_piece(n->mean));
      return;
    }
    const double shrink = n->variance / (n->variance + s * s);
    out.emplace_back(lw, normal_piece(n->mean + shrink * (x - n->mean), std::sqrt(shrink) * s));
  } else if (const auto* u = std::get_if<UniformComponent>(&c)) {
    out.emplace_back(lw, truncated_piece(x, s, u->lower, u->upper));
  } else if (const auto* e = std::get_if<ExponentialSlab>(&c)) {
    out.emplace_back(lw, truncated_piece(x - e->rate * s * s, s, e->origin, kInf));
  } else {
    const auto& lap = std::get<LaplaceSlab>(c);
    const double z = x - lap.mean;
    const double t1 = kernels::exp_branch_log_term(z, s, lap.rate);
    const double t2 = kernels::exp_branch_log_term(-z, s, lap.rate);
    const double tot = num::log_add_exp(t1, t2);
    out.emplace_back(lw + t1 - tot, truncated_piece(x - lap.rate * s * s, s, lap.mean, kInf));
    out.emplace_back(lw + t2 - tot, truncated_piece(x + lap.rate * s * s, s, -kInf, lap.mean));
  }
}

// Uniform on (0, 1) from the top 53 bits.
double unit_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_piece(const Piece& p, std::mt19937_64& rng) {
  switch (p.kind) {
    case Piece::Kind::point:
      return p.center;
    case Piece::Kind::normal:
      return p.center + p.sd * num::norm_quantile(unit_uniform(rng));
    case Piece::Kind::truncated: {
      const double u = unit_uniform(rng);
      const double log_p = p.lo == -kInf ? std::log(u) + p.log_mass
                                         : num::log_add_exp(p.log_cdf_lo, std::log(u) + p.log_mass);
      const double z = std::clamp(num::norm_quantile_log(log_p), p.lo, p.hi);
      return p.center + p.sd * (p.flip ? -z : z);
    }
  }
  return 0.0;
}

}  // namespace

PosteriorSummary posterior_summary(const ObservationSet& obs, const FittedPrior& g) {
  const auto comps = expand(g);
  const std::size_t n = obs.size();
  PosteriorSummary out;
  out.mean.resize(n);
  out.sd.resize(n);
  out.second_moment.resize(n);
  out.lfsr.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = obs.x()[i], s = obs.s()[i];
    const auto r = responsibilities(x, s, comps);
    double mean = 0.0, m2 = 0.0, p_le = 0.0, p_ge = 0.0;
    for (std::size_t k = 0; k < comps.size(); ++k) {
      const double w = std::exp(r.log_resp[k]);
      if (w == 0.0) continue;
      const auto cp = kernels::component_posterior(x, s, comps[k].component);
      mean += w * cp.mean;
      m2 += w * cp.second_moment;
      p_le += w * (cp.prob_negative + cp.prob_zero);
      p_ge += w * (cp.prob_positive + cp.prob_zero);
    }
    out.mean[i] = mean;
    out.second_moment[i] = m2;
    out.sd[i] = std::sqrt(std::max(0.0, m2 - mean * mean));
    out.lfsr[i] = std::clamp(std::min(p_le, p_ge), 0.0, 1.0);
  }
  return out;
}

double log_likelihood(const ObservationSet& obs, const FittedPrior& g) {
  const auto comps = expand(g);
  double ll = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) ll += responsibilities(obs.x()[i], obs.s()[i], comps).log_marginal;
  return ll;
}

PosteriorSampler::PosteriorSampler(const ObservationSet& obs, const FittedPrior& g, std::uint64_t seed)
    : seed_(seed) {
  const auto comps = expand(g);
  pieces_.resize(obs.size());
  std::vector<std::pair<double, Piece>> raw;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double x = obs.x()[i], s = obs.s()[i];
    const auto r = responsibilities(x, s, comps);
    raw.clear();
    for (std::size_t k = 0; k < comps.size(); ++k)
      if (std::isfinite(r.log_resp[k])) append_pieces(x, s, comps[k].component, r.log_resp[k], raw);
    double acc = 0.0;
    auto& dst = pieces_[i];
    for (auto& [lw, piece] : raw) {
      acc += std::exp(lw);
      piece.cumulative = acc;
      dst.push_back(piece);
    }
    for (auto& p : dst) p.cumulative /= acc;
    dst.back().cumulative = 1.0;
  }
}

void PosteriorSampler::draw_column(std::size_t i, std::size_t nsamp, std::uint64_t stream, double* out) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(i),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32)};
  std::mt19937_64 rng(seq);
  const auto& pieces = pieces_[i];
  for (std::size_t d = 0; d < nsamp; ++d) {
    const Piece* p = &pieces.front();
    if (pieces.size() > 1) {
      const double u = unit_uniform(rng);
      const auto it = std::lower_bound(pieces.begin(), pieces.end(), u,
                                       [](const Piece& pc, double v) { return pc.cumulative < v; });
      p = it == pieces.end() ? &pieces.back() : &*it;
    }
    out[d] = sample_piece(*p, rng);
  }
}

Eigen::MatrixXd PosteriorSampler::draw(std::size_t nsamp) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(nsamp), static_cast<Eigen::Index>(pieces_.size()));
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    draw_column(i, nsamp, calls_, m.col(static_cast<Eigen::Index>(i)).data());
  ++calls_;
  return m;
}

Eigen::MatrixXd posterior_sample(const ObservationSet& obs, const FittedPrior& g, std::size_t nsamp,
                                 std::uint64_t seed) {
  PosteriorSampler sampler(obs, g, seed);
  return sampler.draw(nsamp);
}

Interval credible_interval(std::vector<double> column, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DataError("credible level must lie in (0, 1)");
  if (column.size() < 100) throw DataError("credible intervals need at least 100 draws");
  std::sort(column.begin(), column.end());
  const auto quantile = [&](double q) {
    const double h = q * static_cast<double>(column.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, column.size() - 1);
    return column[lo] + (h - static_cast<double>(lo)) * (column[hi] - column[lo]);
  };
  const double tail = 0.5 * (1.0 - level);
  return {quantile(tail), quantile(1.0 - tail)};
}

std::vector<Interval> credible_intervals(const Eigen::MatrixXd& draws, double level) {
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(draws.cols()));
  for (Eigen::Index i = 0; i < draws.cols(); ++i) {
    std::vector<double> col(draws.col(i).data(), draws.col(i).data() + draws.rows());
    out.push_back(credible_interval(std::move(col), level));
  }
  return out;
}

std::vector<Interval> credible_intervals(const PosteriorSampler& sampler, std::size_t nsamp, double level) {
  std::vector<Interval> out;
  out.reserve(sampler.size());
  std::vector<double> col(nsamp);
  for (std::size_t i = 0; i < sampler.size(); ++i) {
    sampler.draw_column(i, nsamp, 0, col.data());
    out.push_back(credible_interval(col, level));
  }
  return out;
}

}  // namespace ebnm
