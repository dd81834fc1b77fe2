#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

namespace ebnm::opt {

/// Objective to minimize. Returns the value at p; when grad is non-null it
/// is resized and filled with the analytic gradient.
using Objective = std::function<double(const Eigen::VectorXd& p, Eigen::VectorXd* grad)>;

struct Options {
  double grad_tol = 1e-8;   // infinity norm of the gradient
  double rel_tol = 1e-10;   // relative change of the objective per step
  int max_iter = 500;
};

struct Result {
  Eigen::VectorXd params;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Central-difference Hessian from the analytic gradient, step
/// 1e-4 * max(1, |p_j|), symmetrized.
Eigen::MatrixXd fd_hessian(const Objective& f, const Eigen::VectorXd& p);

/// Newton iterations with a finite-difference Hessian and backtracking line
/// search; falls back to gradient descent when the Newton direction is not
/// a descent direction or the Hessian is not positive definite. Accepted
/// iterates never increase the objective.
Result newton_minimize(const Objective& f, Eigen::VectorXd start, const Options& opts = {});

/// Runs newton_minimize from every start and returns the converged result
/// with the smallest objective. Throws FitError carrying the best iterate
/// when no start converges.
Result minimize_multistart(const Objective& f, std::span<const Eigen::VectorXd> starts,
                           const Options& opts = {});

}  // namespace ebnm::opt
