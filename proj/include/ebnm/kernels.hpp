#pragma once

// Component marginal log-densities (prior component convolved with
// N(0, s^2) noise) and component-conditional posterior moments.

#include "ebnm/prior.hpp"

namespace ebnm::kernels {

/// log N(x; mu, s^2).
double log_marginal_point(double x, double s, double mu);

/// log N(x; mu, sigma2 + s^2).
double log_marginal_normal(double x, double s, double mu, double sigma2);

/// Laplace(mu, a) slab convolved with N(0, s^2).
double log_marginal_laplace(double x, double s, double mu, double a);

/// Exp(a) slab on [0, inf) convolved with N(0, s^2).
double log_marginal_exp(double x, double s, double a);

/// Unif[l, r] convolved with N(0, s^2); l == r is a point mass.
double log_marginal_uniform(double x, double s, double l, double r);

double log_marginal(double x, double s, const Component& c);

/// a^2 s^2 / 2 - a z + log Phi(z/s - a s), the log of one branch of the
/// exponential/Laplace convolution (without the rate prefactor).
double exp_branch_log_term(double z, double s, double a);

struct TruncNormMoments {
  double mean;
  double var;
  double log_mass;
};

/// Moments of N(m, s^2) restricted to [l, r]; l and r may be infinite.
TruncNormMoments truncnorm_moments(double m, double s, double l, double r);

struct ComponentPosterior {
  double mean;
  double second_moment;
  double prob_negative;
  double prob_zero;
  double prob_positive;
};

/// Posterior of theta given x ~ N(theta, s^2) and theta ~ c.
ComponentPosterior component_posterior(double x, double s, const Component& c);

/// Split of [l, r] probability mass of N(m, s^2) into theta < 0 and theta > 0,
/// normalized to sum to one.
struct SignSplit {
  double negative;
  double positive;
};
SignSplit truncnorm_sign_split(double m, double s, double l, double r);

}  // namespace ebnm::kernels
