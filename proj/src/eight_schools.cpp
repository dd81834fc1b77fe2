#include <cmath>
#include <cstdio>

#include "ebnm/bench.hpp"
#include "ebnm/ebnm.hpp"

namespace ebnm {

namespace {

std::string describe(const FittedPrior& g) {
  const auto& p = g.parametric();
  char buf[160];
  if (p.is_point_mass()) {
    std::snprintf(buf, sizeof buf, "point mass at mu = %.6f", p.mu);
  } else {
    std::snprintf(buf, sizeof buf, "%.6f * delta(%.6f) + %.6f * N(%.6f, %.6f)", p.pi0, p.mu, 1.0 - p.pi0, p.mu,
                  p.scale);
  }
  return buf;
}

}  // namespace

EightSchoolsReport eight_schools() {
  const auto obs = validate_observations(kEightSchoolsX, kEightSchoolsS);
  EightSchoolsReport r;
  const auto zero = fit_point_normal(obs, Mode::fixed(0.0));
  const auto est = fit_point_normal(obs, Mode::estimate());
  r.mode_zero = {Family::point_normal, zero.prior};
  r.mode_estimated = {Family::point_normal, est.prior};
  r.loglik_mode_zero = zero.log_likelihood;
  r.loglik_mode_estimated = est.log_likelihood;
  r.loglik_difference = est.log_likelihood - zero.log_likelihood;
  r.likelihood_ratio = std::exp(r.loglik_difference);

  char buf[512];
  std::snprintf(buf, sizeof buf,
                "eight schools, point-normal prior\n"
                "  mode = 0:        g = %s\n"
                "                   log-likelihood = %.6f\n"
                "  mode estimated:  g = %s\n"
                "                   log-likelihood = %.6f\n"
                "  log-likelihood difference = %.6f\n"
                "  likelihood ratio = %.6f\n",
                describe(r.mode_zero).c_str(), r.loglik_mode_zero, describe(r.mode_estimated).c_str(),
                r.loglik_mode_estimated, r.loglik_difference, r.likelihood_ratio);
  r.text = buf;
  return r;
}

}  // namespace ebnm
