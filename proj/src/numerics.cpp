#include "ebnm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

namespace ebnm::num {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// exp(x*x) with the rounding error of the square carried separately.
double exp_square(double x) {
  const double hi = x * x;
  const double lo = std::fma(x, x, -hi);
  return std::exp(hi) * (1.0 + lo);
}

// Asymptotic expansion, used where exp(x^2) would overflow.
double erfcx_asymptotic(double x) {
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= -(2.0 * k - 1.0) * inv2x2;
    sum += term;
    if (std::fabs(term) < 1e-17) break;
  }
  return kInvSqrtPi / x * sum;
}

}  // namespace

double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x >= 25.0) return x == kInf ? 0.0 : erfcx_asymptotic(x);
  if (x >= 0.0) return exp_square(x) * std::erfc(x);
  if (x < -26.7) return kInf;
  return 2.0 * exp_square(x) - exp_square(x) * std::erfc(-x);
}

double log_norm_cdf(double z) {
  if (std::isnan(z)) return z;
  if (z == kInf) return 0.0;
  if (z == -kInf) return -kInf;
  if (z < -5.0) {
    const double t = -z / kSqrt2;
    return std::log(0.5 * erfcx(t)) - t * t;
  }
  if (z > 0.0) return std::log1p(-0.5 * std::erfc(z / kSqrt2));
  return std::log(0.5 * std::erfc(-z / kSqrt2));
}

double inv_mills(double z) {
  if (z == -kInf) return kInf;
  if (z == kInf) return 0.0;
  if (z < -5.0) return kSqrt2OverPi / erfcx(-z / kSqrt2);
  return std::exp(log_std_norm_pdf(z) - log_norm_cdf(z));
}

double log1mexp(double d) {
  if (d > -0.6931471805599453) return std::log(-std::expm1(d));
  return std::log1p(-std::exp(d));
}

double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

double log_sum_exp(std::span<const double> v) {
  double m = -kInf;
  for (double e : v) m = std::max(m, e);
  if (m == -kInf || m == kInf) return m;
  double acc = 0.0;
  for (double e : v) acc += std::exp(e - m);
  return m + std::log(acc);
}

double log_diff_norm_cdf(double a, double b) {
  if (!(a < b)) return -kInf;
  if (a >= 0.0) {
    // Both limits in the upper half: use Phi(-a) - Phi(-b).
    const double la = log_norm_cdf(-a);
    const double lb = log_norm_cdf(-b);
    return la + log1mexp(lb - la);
  }
  if (b <= 0.0) {
    const double la = log_norm_cdf(a);
    const double lb = log_norm_cdf(b);
    return lb + log1mexp(la - lb);
  }
  const double tails = std::exp(log_norm_cdf(a)) + std::exp(log_norm_cdf(-b));
  return std::log1p(-tails);
}

double norm_quantile(double p) {
  static const boost::math::normal_distribution<double> std_normal;
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  if (p > 0.5) return boost::math::quantile(boost::math::complement(std_normal, 1.0 - p));
  return boost::math::quantile(std_normal, p);
}

double norm_quantile_log(double log_p) {
  static const boost::math::normal_distribution<double> std_normal;
  if (log_p >= 0.0) return kInf;
  if (log_p == -kInf) return -kInf;
  double z;
  if (log_p > -0.6931471805599453) {
    const double q = -std::expm1(log_p);
    z = boost::math::quantile(boost::math::complement(std_normal, q));
  } else if (log_p > -700.0) {
    z = boost::math::quantile(std_normal, std::exp(log_p));
  } else {
    // Leading-order tail inversion, refined by Newton on log Phi below.
    const double t = -2.0 * log_p;
    z = -std::sqrt(t - std::log(2.0 * 3.141592653589793 * t));
    for (int it = 0; it < 50; ++it) {
      const double step = (log_norm_cdf(z) - log_p) / inv_mills(z);
      z -= step;
      if (std::fabs(step) <= 1e-15 * std::fabs(z)) break;
    }
  }
  return z;
}

}  // namespace ebnm::num
