#include "ebnm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>

#include "ebnm/numerics.hpp"

namespace ebnm::kernels {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ComponentPosterior point_posterior(double mu) {
  if (mu < 0.0) return {mu, mu * mu, 1.0, 0.0, 0.0};
  if (mu > 0.0) return {mu, mu * mu, 0.0, 0.0, 1.0};
  return {0.0, 0.0, 0.0, 1.0, 0.0};
}

ComponentPosterior truncated_posterior(double m, double s, double l, double r) {
  const auto tm = truncnorm_moments(m, s, l, r);
  const auto split = truncnorm_sign_split(m, s, l, r);
  return {tm.mean, tm.var + tm.mean * tm.mean, split.negative, 0.0, split.positive};
}

// Past this many SDs into the lower tail, one-sided moments come from the
// continued fraction for the Mills ratio instead of exp(log phi - log Phi).
constexpr double kTailCut = 3.0;

// For X ~ N(0,1) truncated to (-inf, -u], u > kTailCut: returns E[-u - X] and
// Var[X]. With t_n = n / (u + t_{n+1}), the Mills ratio is 1 / (u + t_1), so
// E = t_1 and Var = (t_2 - t_1) / (u + t_2), free of cancellation.
std::pair<double, double> tail_moments(double u) {
  double t = 0.0, t2 = 0.0;
  for (int n = 200; n >= 1; --n) {
    if (n == 1) t2 = t;
    t = n / (u + t);
  }
  return {t, (t2 - t) / (u + t2)};
}

// Offset below b and variance of the standard normal restricted to a short
// interval [a, b]; weights are taken relative to the density at peak.
std::pair<double, double> narrow_moments(double a, double b, double peak) {
  using Rule = boost::math::quadrature::gauss<double, 30>;
  const double c = 0.5 * (a + b);
  auto dens = [peak](double t) { return std::exp(0.5 * (peak - t) * (peak + t)); };
  const double z = Rule::integrate(dens, a, b);
  const double m1 = Rule::integrate([&](double t) { return (t - c) * dens(t); }, a, b) / z;
  const double m2 = Rule::integrate([&](double t) { return (t - c) * (t - c) * dens(t); }, a, b) / z;
  return {b - c - m1, m2 - m1 * m1};
}

}  // namespace

double log_marginal_point(double x, double s, double mu) { return num::log_norm_pdf(x, mu, s); }

double log_marginal_normal(double x, double s, double mu, double sigma2) {
  return num::log_norm_pdf(x, mu, std::sqrt(sigma2 + s * s));
}

double exp_branch_log_term(double z, double s, double a) {
  const double u = z / s - a * s;
  if (u < -5.0) {
    // Phi(u) = erfcx(-u/sqrt2)/2 * exp(-u^2/2); the quadratic terms cancel
    // to -z^2/(2 s^2).
    return std::log(0.5 * num::erfcx(-u / num::kSqrt2)) - 0.5 * (z / s) * (z / s);
  }
  return 0.5 * a * a * s * s - a * z + num::log_norm_cdf(u);
}

double log_marginal_laplace(double x, double s, double mu, double a) {
  const double z = x - mu;
  return std::log(0.5 * a) + num::log_add_exp(exp_branch_log_term(z, s, a),
                                              exp_branch_log_term(-z, s, a));
}

double log_marginal_exp(double x, double s, double a) {
  return std::log(a) + exp_branch_log_term(x, s, a);
}

double log_marginal_uniform(double x, double s, double l, double r) {
  if (l == r) return log_marginal_point(x, s, l);
  return num::log_diff_norm_cdf((x - r) / s, (x - l) / s) - std::log(r - l);
}

double log_marginal(double x, double s, const Component& c) {
  struct Visitor {
    double x, s;
    double operator()(const PointMass& p) const { return log_marginal_point(x, s, p.location); }
    double operator()(const NormalComponent& n) const {
      return log_marginal_normal(x, s, n.mean, n.variance);
    }
    double operator()(const UniformComponent& u) const {
      return log_marginal_uniform(x, s, u.lower, u.upper);
    }
    double operator()(const LaplaceSlab& l) const { return log_marginal_laplace(x, s, l.mean, l.rate); }
    double operator()(const ExponentialSlab& e) const {
      return log_marginal_exp(x - e.origin, s, e.rate);
    }
  };
  return std::visit(Visitor{x, s}, c);
}

TruncNormMoments truncnorm_moments(double m, double s, double l, double r) {
  if (l == r) return {l, 0.0, -kInf};
  double a = (l - m) / s;
  double b = (r - m) / s;
  // Work with the mass on the left of the interval's centre so that tail
  // ratios come from the stable lower-tail branch of log Phi.
  const bool flip = a > -b;
  if (flip) {
    const double t = a;
    a = -b;
    b = -t;
  }
  const double log_z = num::log_diff_norm_cdf(a, b);
  if (b == kInf) return {m, s * s, log_z};

  // Standardized moments of t = b - X, X the truncated standard normal.
  double off = 0.0, var_std = 0.0;
  const double w = b - a;
  if (w <= 1.0 && w * std::max(std::fabs(a), std::fabs(b)) <= 4.0) {
    // Narrow interval: the density barely varies, fixed-order quadrature is exact.
    const double peak = std::clamp(0.0, a, b);
    const auto mom = narrow_moments(a, b, peak);
    off = mom.first;
    var_std = mom.second;
  } else if (b < -kTailCut) {
    const auto tb = tail_moments(-b);
    if (a == -kInf) {
      off = tb.first;
      var_std = tb.second;
    } else {
      // Difference of the two one-sided tails below b and below a.
      const auto ta = tail_moments(-a);
      const double rho = std::exp(num::log_norm_cdf(a) - num::log_norm_cdf(b));
      const double off_a = w + ta.first;
      off = (tb.first - rho * off_a) / (1.0 - rho);
      const double gap = tb.first - off_a;
      var_std = (tb.second - rho * ta.second) / (1.0 - rho) - rho * gap * gap / ((1.0 - rho) * (1.0 - rho));
    }
  } else {
    const double ra = a == -kInf ? 0.0 : std::exp(num::log_std_norm_pdf(a) - log_z);
    const double rb = std::exp(num::log_std_norm_pdf(b) - log_z);
    const double ta = a == -kInf ? 0.0 : a * ra;
    const double mean_std = ra - rb;
    off = b - mean_std;
    var_std = 1.0 + ta - b * rb - mean_std * mean_std;
  }
  var_std = std::max(0.0, var_std);
  off = std::clamp(off, 0.0, w);
  const double mean = flip ? l + s * off : r - s * off;
  return {std::clamp(mean, l, r), s * s * var_std, log_z};
}

SignSplit truncnorm_sign_split(double m, double s, double l, double r) {
  if (r <= 0.0) return {1.0, 0.0};
  if (l >= 0.0) return {0.0, 1.0};
  const double log_neg = num::log_diff_norm_cdf((l - m) / s, (0.0 - m) / s);
  const double log_pos = num::log_diff_norm_cdf((0.0 - m) / s, (r - m) / s);
  const double log_tot = num::log_add_exp(log_neg, log_pos);
  return {std::exp(log_neg - log_tot), std::exp(log_pos - log_tot)};
}

ComponentPosterior component_posterior(double x, double s, const Component& c) {
  struct Visitor {
    double x, s;
    ComponentPosterior operator()(const PointMass& p) const { return point_posterior(p.location); }
    ComponentPosterior operator()(const NormalComponent& n) const {
      if (n.variance == 0.0) return point_posterior(n.mean);
      const double s2 = s * s;
      const double shrink = n.variance / (n.variance + s2);
      const double mean = n.mean + shrink * (x - n.mean);
      const double var = shrink * s2;
      const double sd = std::sqrt(var);
      const double ln = num::log_norm_cdf(-mean / sd);
      const double lp = num::log_norm_cdf(mean / sd);
      const double lt = num::log_add_exp(ln, lp);
      return {mean, var + mean * mean, std::exp(ln - lt), 0.0, std::exp(lp - lt)};
    }
    ComponentPosterior operator()(const UniformComponent& u) const {
      if (u.lower == u.upper) return point_posterior(u.lower);
      return truncated_posterior(x, s, u.lower, u.upper);
    }
    ComponentPosterior operator()(const ExponentialSlab& e) const {
      return truncated_posterior(x - e.rate * s * s, s, e.origin, kInf);
    }
    ComponentPosterior operator()(const LaplaceSlab& lap) const {
      const double z = x - lap.mean;
      const double a = lap.rate;
      const double lw_pos = exp_branch_log_term(z, s, a);
      const double lw_neg = exp_branch_log_term(-z, s, a);
      const double lw_tot = num::log_add_exp(lw_pos, lw_neg);
      const double w_pos = std::exp(lw_pos - lw_tot);
      const double w_neg = std::exp(lw_neg - lw_tot);
      const auto pos = truncated_posterior(x - a * s * s, s, lap.mean, kInf);
      const auto neg = truncated_posterior(x + a * s * s, s, -kInf, lap.mean);
      return {w_pos * pos.mean + w_neg * neg.mean,
              w_pos * pos.second_moment + w_neg * neg.second_moment,
              w_pos * pos.prob_negative + w_neg * neg.prob_negative, 0.0,
              w_pos * pos.prob_positive + w_neg * neg.prob_positive};
    }
  };
  return std::visit(Visitor{x, s}, c);
}

}  // namespace ebnm::kernels
