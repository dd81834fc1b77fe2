#include "ebnm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ebnm/error.hpp"

namespace ebnm::opt {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;

struct LineSearchResult {
  bool accepted = false;
  Eigen::VectorXd params;
  double value = 0.0;
};

LineSearchResult backtrack(const Objective& f, const Eigen::VectorXd& x, double fx,
                           const Eigen::VectorXd& g, const Eigen::VectorXd& dir, double t0) {
  const double slope = g.dot(dir);
  double t = t0;
  for (int k = 0; k < kMaxHalvings; ++k, t *= 0.5) {
    Eigen::VectorXd trial = x + t * dir;
    const double ft = f(trial, nullptr);
    if (std::isfinite(ft) && ft <= fx + kArmijo * t * slope) return {true, std::move(trial), ft};
  }
  return {};
}

}  // namespace

Eigen::MatrixXd fd_hessian(const Objective& f, const Eigen::VectorXd& p) {
  const auto d = p.size();
  Eigen::MatrixXd h(d, d);
  Eigen::VectorXd gp, gm;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double step = 1e-4 * std::max(1.0, std::fabs(p[j]));
    Eigen::VectorXd xp = p, xm = p;
    xp[j] += step;
    xm[j] -= step;
    f(xp, &gp);
    f(xm, &gm);
    h.col(j) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

Result newton_minimize(const Objective& f, Eigen::VectorXd start, const Options& opts) {
  Result r;
  r.params = std::move(start);
  Eigen::VectorXd g;
  r.value = f(r.params, &g);
  if (!std::isfinite(r.value)) return r;
  if (r.params.size() == 0) {
    r.converged = true;
    return r;
  }

  for (r.iterations = 0; r.iterations < opts.max_iter; ++r.iterations) {
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      r.converged = true;
      break;
    }

    LineSearchResult step;
    const Eigen::MatrixXd h = fd_hessian(f, r.params);
    if (h.allFinite()) {
      Eigen::VectorXd dir;
      Eigen::LLT<Eigen::MatrixXd> llt(h);
      if (llt.info() == Eigen::Success) {
        dir = -llt.solve(g);
      } else {
        // Indefinite curvature: Newton step on the eigenvalue-modified
        // Hessian (|lambda|, floored relative to the largest).
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
        Eigen::VectorXd lam = eig.eigenvalues().cwiseAbs();
        const double floor = std::max(1e-8 * lam.maxCoeff(), 1e-12);
        lam = lam.cwiseMax(floor);
        dir = -eig.eigenvectors() * (eig.eigenvectors().transpose() * g).cwiseQuotient(lam);
      }
      if (dir.allFinite() && g.dot(dir) < 0.0) step = backtrack(f, r.params, r.value, g, dir, 1.0);
    }
    if (!step.accepted) {
      // Gradient descent fallback, first trial step of unit length.
      const double gnorm = g.norm();
      step = backtrack(f, r.params, r.value, g, -g, 1.0 / std::max(1.0, gnorm));
    }
    if (!step.accepted) {
      // No decrease is achievable at floating-point resolution.
      r.converged = g.lpNorm<Eigen::Infinity>() <= 1e-4 * std::max(1.0, std::fabs(r.value));
      break;
    }

    const double change = r.value - step.value;
    r.params = std::move(step.params);
    r.value = step.value;
    f(r.params, &g);
    if (change <= opts.rel_tol * std::max(1.0, std::fabs(r.value))) {
      r.converged = true;
      ++r.iterations;
      break;
    }
  }
  return r;
}

Result minimize_multistart(const Objective& f, std::span<const Eigen::VectorXd> starts,
                           const Options& opts) {
  Result best;
  best.value = std::numeric_limits<double>::infinity();
  Result best_any = best;
  for (const auto& s : starts) {
    Result r = newton_minimize(f, s, opts);
    if (r.value < best_any.value || best_any.params.size() == 0) best_any = r;
    if (r.converged && r.value < best.value) best = std::move(r);
  }
  if (!best.converged) {
    std::vector<double> it(best_any.params.data(), best_any.params.data() + best_any.params.size());
    throw FitError("optimizer did not converge from any start", std::move(it), best_any.value);
  }
  return best;
}

}  // namespace ebnm::opt
