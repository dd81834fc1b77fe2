#pragma once

// Gaussian tail numerics shared by the convolution kernels, the posterior
// code and the samplers. Everything is built on top of erfcx so that tail
// probabilities keep full relative precision far from the mean.

#include <cmath>
#include <span>

namespace ebnm::num {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kSqrt2OverPi = 0.79788456080286535588;
inline constexpr double kInvSqrtPi = 0.56418958354775628695;

/// Scaled complementary error function exp(x^2) * erfc(x).
double erfcx(double x);

/// log N(x; 0, 1).
inline double log_std_norm_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

/// log N(x; mean, sd^2).
inline double log_norm_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return log_std_norm_pdf(z) - std::log(sd);
}

/// log Phi(z), accurate in both tails. Accepts +-infinity.
double log_norm_cdf(double z);

/// phi(z) / Phi(z), the derivative of log Phi.
double inv_mills(double z);

/// log(Phi(b) - Phi(a)) for a <= b, either of which may be infinite.
double log_diff_norm_cdf(double a, double b);

/// log(1 - exp(d)) for d <= 0.
double log1mexp(double d);

/// log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

double log_sum_exp(std::span<const double> v);

/// Standard normal quantile given log p; valid down to log p ~ -1e300.
double norm_quantile_log(double log_p);

/// Standard normal quantile, p in (0,1).
double norm_quantile(double p);

}  // namespace ebnm::num
