#pragma once

// Finite-mixture approximations of the nonparametric families: grid
// construction, the n x K component likelihood matrix, and maximization of
// the mixture log-likelihood over the probability simplex.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ebnm/family_spec.hpp"
#include "ebnm/observations.hpp"
#include "ebnm/prior.hpp"

namespace ebnm {

/// Component grid for a nonparametric family, with uniform weights.
MixturePrior build_grid(const PriorFamilySpec& spec, const ObservationSet& obs);

/// Number of equispaced support points used by the default NPMLE grid.
int npmle_grid_size(std::size_t n, double range, double min_s);

/// Geometric scale grid from lo to the first value >= hi, ratio sqrt(2).
std::vector<double> geometric_scale_grid(double lo, double hi);

/// log l_ik, the log marginal density of x_i under component k.
struct LikelihoodMatrix {
  Eigen::MatrixXd log_values;  // n x K
  Eigen::VectorXd row_max;     // per-row maximum of log_values

  Eigen::Index rows() const noexcept { return log_values.rows(); }
  Eigen::Index cols() const noexcept { return log_values.cols(); }

  /// exp(log l_ik - row_max_i); every row has maximum 1.
  Eigen::MatrixXd normalized() const;
};

/// Throws DataError("observation unsupported by grid") when some row is
/// -inf in every column.
LikelihoodMatrix likelihood_matrix(const ObservationSet& obs, std::span<const Component> components);
LikelihoodMatrix likelihood_matrix_from_log(Eigen::MatrixXd log_values);

struct KktCertificate {
  /// max_k (1/n) sum_i l_ik / (L pi)_i - 1
  double max_dual_residual = 0.0;
  /// Smallest (1/n) sum_i l_ik / (L pi)_i - 1 over components with pi_k > 1e-8;
  /// zero at an exact optimum.
  double min_support_residual = 0.0;
  /// Mean log-likelihood (1/n) sum_i log sum_k pi_k l_ik.
  double objective = 0.0;
  int iterations = 0;
};

struct WeightFit {
  std::vector<double> weights;
  KktCertificate cert;
};

struct WeightOptions {
  int em_warm_start = 20;
  int max_iter = 500;
  double tolerance = 1e-8;
};

/// Maximizes (1/n) sum_i log((L pi)_i) over the simplex: EM warm start
/// then sequential quadratic refinement with an active-set QP. Duplicate
/// columns share their mass equally. Throws FitError (best weights and
/// residual attached) when the certificate is not reached.
WeightFit optimize_weights(const LikelihoodMatrix& lik, std::optional<std::vector<double>> init = {},
                           const WeightOptions& opts = {});

/// Mean log-likelihood of weights under a likelihood matrix.
double mixture_objective(const LikelihoodMatrix& lik, std::span<const double> weights);

/// Plain EM updates; returns the weights after `iterations` steps.
std::vector<double> em_weights(const LikelihoodMatrix& lik, std::vector<double> init, int iterations,
                               std::vector<double>* objective_trace = nullptr);

struct MixtureFit {
  MixturePrior prior;
  double log_likelihood = 0.0;
  KktCertificate cert;
};

/// build_grid (or the g_init grid), likelihood_matrix, optimize_weights,
/// then pruning of weights below 1e-10.
MixtureFit fit_nonparametric(const ObservationSet& obs, const PriorFamilySpec& spec);

}  // namespace ebnm
