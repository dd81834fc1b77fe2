#include "ebnm/mix_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ebnm/error.hpp"
#include "ebnm/kernels.hpp"

namespace ebnm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDuplicateTol = 1e-14;
constexpr double kPruneTol = 1e-10;
constexpr double kSupportTol = 1e-8;
constexpr double kComplementarityTol = 1e-6;

// Groups of identical columns; returns for each column the index of its
// representative and fills `reps` with the representatives.
std::vector<Eigen::Index> duplicate_groups(const Eigen::MatrixXd& a, std::vector<Eigen::Index>& reps) {
  const Eigen::Index k = a.cols();
  std::vector<Eigen::Index> rep_of(k, -1);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (rep_of[j] >= 0) continue;
    rep_of[j] = j;
    reps.push_back(j);
    for (Eigen::Index m = j + 1; m < k; ++m) {
      if (rep_of[m] >= 0) continue;
      if ((a.col(j) - a.col(m)).cwiseAbs().maxCoeff() <= kDuplicateTol) rep_of[m] = j;
    }
  }
  return rep_of;
}

struct Evaluation {
  Eigen::VectorXd mix;      // A pi
  Eigen::VectorXd colmean;  // (1/n) A^T (1 / A pi)
  double objective;         // (1/n) sum log(A pi), row-normalized scale
};

Evaluation evaluate(const Eigen::MatrixXd& a, const Eigen::VectorXd& pi) {
  Evaluation e;
  e.mix = a * pi;
  const double n = static_cast<double>(a.rows());
  e.objective = e.mix.array().log().sum() / n;
  e.colmean = a.transpose() * e.mix.cwiseInverse() / n;
  return e;
}

double objective_only(const Eigen::MatrixXd& a, const Eigen::VectorXd& pi) {
  return (a * pi).array().log().sum() / static_cast<double>(a.rows());
}

void fill_certificate(const Evaluation& e, const Eigen::VectorXd& pi, KktCertificate& cert) {
  cert.max_dual_residual = e.colmean.maxCoeff() - 1.0;
  double min_support = 0.0;
  for (Eigen::Index k = 0; k < pi.size(); ++k)
    if (pi[k] > kSupportTol) min_support = std::min(min_support, e.colmean[k] - 1.0);
  cert.min_support_residual = min_support;
}

bool certified(const KktCertificate& c, double tol) {
  return c.max_dual_residual <= tol && c.min_support_residual >= -kComplementarityTol;
}

Eigen::LLT<Eigen::MatrixXd> regularized_llt(Eigen::MatrixXd h) {
  const double scale = std::max(h.diagonal().maxCoeff(), 1e-300);
  double ridge = 1e-12 * scale;
  for (int attempt = 0; attempt < 12; ++attempt, ridge *= 10.0) {
    Eigen::MatrixXd hr = h;
    hr.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(hr);
    if (llt.info() == Eigen::Success) return llt;
  }
  h.diagonal().array() += scale;
  return Eigen::LLT<Eigen::MatrixXd>(h);
}

// Active-set solution of
//   min_y 0.5 (y - x)' H (y - x) + g' (y - x)  s.t.  sum(y) = 1, y >= 0,
// started from the feasible point x.
Eigen::VectorXd simplex_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g, const Eigen::VectorXd& x) {
  const Eigen::Index k = x.size();
  // Weights that are numerically zero start on their bound; otherwise each
  // would block a step on its own. The multiplier test releases any that
  // should be positive.
  Eigen::VectorXd y = x;
  std::vector<bool> active(k);
  const double floor = 1e-10 * x.maxCoeff();
  for (Eigen::Index j = 0; j < k; ++j) {
    active[j] = y[j] <= floor;
    if (active[j]) y[j] = 0.0;
  }
  y /= y.sum();

  const int max_steps = 4 * static_cast<int>(k) + 20;
  for (int step = 0; step < max_steps; ++step) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < k; ++j)
      if (!active[j]) free.push_back(j);
    const Eigen::Index m = static_cast<Eigen::Index>(free.size());

    const Eigen::VectorXd b = h * (y - x) + g;
    Eigen::MatrixXd hff(m, m);
    Eigen::VectorXd bf(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      bf[r] = b[free[r]];
      for (Eigen::Index c = 0; c < m; ++c) hff(r, c) = h(free[r], free[c]);
    }
    const auto llt = regularized_llt(hff);
    const Eigen::VectorXd hinv_b = llt.solve(bf);
    const Eigen::VectorXd hinv_1 = llt.solve(Eigen::VectorXd::Ones(m));
    const double nu = -hinv_b.sum() / hinv_1.sum();
    const Eigen::VectorXd pf = -(hinv_b + nu * hinv_1);

    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index r = 0; r < m; ++r) {
      if (pf[r] < 0.0) {
        const double ratio = -y[free[r]] / pf[r];
        if (ratio < alpha) {
          alpha = ratio;
          blocking = free[r];
        }
      }
    }
    for (Eigen::Index r = 0; r < m; ++r) y[free[r]] += alpha * pf[r];
    if (blocking >= 0) {
      y[blocking] = 0.0;
      active[blocking] = true;
      continue;
    }

    // Minimum on the current face: release the bound with the most negative
    // multiplier, or stop.
    const Eigen::VectorXd b_new = h * (y - x) + g;
    Eigen::Index release = -1;
    double most_negative = -1e-13;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!active[j]) continue;
      const double mult = b_new[j] + nu;
      if (mult < most_negative) {
        most_negative = mult;
        release = j;
      }
    }
    if (release < 0) break;
    active[release] = false;
  }
  for (Eigen::Index j = 0; j < k; ++j) y[j] = std::max(0.0, y[j]);
  return y / y.sum();
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

Eigen::MatrixXd LikelihoodMatrix::normalized() const {
  return (log_values.colwise() - row_max).array().exp().matrix();
}

LikelihoodMatrix likelihood_matrix_from_log(Eigen::MatrixXd log_values) {
  LikelihoodMatrix lm;
  lm.row_max = log_values.rowwise().maxCoeff();
  for (Eigen::Index i = 0; i < lm.row_max.size(); ++i)
    if (!std::isfinite(lm.row_max[i])) throw DataError("observation unsupported by grid");
  lm.log_values = std::move(log_values);
  return lm;
}

LikelihoodMatrix likelihood_matrix(const ObservationSet& obs, std::span<const Component> components) {
  const auto n = static_cast<Eigen::Index>(obs.size());
  const auto k = static_cast<Eigen::Index>(components.size());
  Eigen::MatrixXd lv(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      lv(i, j) = kernels::log_marginal(obs.x()[i], obs.s()[i], components[j]);
  return likelihood_matrix_from_log(std::move(lv));
}

double mixture_objective(const LikelihoodMatrix& lik, std::span<const double> weights) {
  const Eigen::Map<const Eigen::VectorXd> pi(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return objective_only(lik.normalized(), pi) + lik.row_max.mean();
}

std::vector<double> em_weights(const LikelihoodMatrix& lik, std::vector<double> init, int iterations,
                               std::vector<double>* objective_trace) {
  const Eigen::MatrixXd a = lik.normalized();
  Eigen::VectorXd pi = Eigen::Map<Eigen::VectorXd>(init.data(), static_cast<Eigen::Index>(init.size()));
  const double shift = lik.row_max.mean();
  for (int it = 0; it < iterations; ++it) {
    const auto e = evaluate(a, pi);
    if (objective_trace) objective_trace->push_back(e.objective + shift);
    pi = pi.cwiseProduct(e.colmean);
    pi /= pi.sum();
  }
  if (objective_trace) objective_trace->push_back(objective_only(a, pi) + shift);
  return to_std(pi);
}

WeightFit optimize_weights(const LikelihoodMatrix& lik, std::optional<std::vector<double>> init,
                           const WeightOptions& opts) {
  const Eigen::MatrixXd full = lik.normalized();
  const Eigen::Index kfull = full.cols();
  const double shift = lik.row_max.mean();

  std::vector<Eigen::Index> reps;
  const auto rep_of = duplicate_groups(full, reps);
  const auto k = static_cast<Eigen::Index>(reps.size());
  Eigen::MatrixXd a(full.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) a.col(j) = full.col(reps[j]);

  Eigen::VectorXd pi = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  if (init) {
    if (static_cast<Eigen::Index>(init->size()) != kfull) throw DataError("initial weights have wrong length");
    pi.setZero();
    for (Eigen::Index j = 0; j < kfull; ++j) {
      const auto pos = std::find(reps.begin(), reps.end(), rep_of[j]) - reps.begin();
      pi[pos] += std::max(0.0, (*init)[j]);
    }
    // EM cannot revive a zero weight; keep every component reachable.
    pi = pi.cwiseMax(1e-6 / static_cast<double>(k));
    pi /= pi.sum();
  }

  KktCertificate cert;
  int iter = 0;
  if (k > 1) {
    for (int it = 0; it < opts.em_warm_start; ++it) {
      const auto e = evaluate(a, pi);
      pi = pi.cwiseProduct(e.colmean);
      pi /= pi.sum();
    }
    const double n = static_cast<double>(a.rows());
    for (; iter < opts.max_iter; ++iter) {
      const auto e = evaluate(a, pi);
      fill_certificate(e, pi, cert);
      if (certified(cert, opts.tolerance)) break;

      // Quadratic model of -f at pi. sum(dir) = 0 only up to rounding, so the
      // gradient is centred at 1 (its pi-weighted mean) to avoid cancellation;
      // the shift is absorbed by the simplex multiplier.
      const Eigen::VectorXd centred = e.colmean.array() - 1.0;
      const Eigen::VectorXd g = -centred;
      const Eigen::VectorXd d = e.mix.cwiseInverse();
      const Eigen::MatrixXd ad = d.asDiagonal() * a;
      const Eigen::MatrixXd h = ad.transpose() * ad / n;
      const Eigen::VectorXd target = simplex_qp(h, g, pi);
      const Eigen::VectorXd dir = target - pi;
      const double slope = centred.dot(dir);  // directional derivative of f
      if (!(slope > 0.0)) {
        // The QP made no ascent progress; fall back to an EM step.
        Eigen::VectorXd em = pi.cwiseProduct(e.colmean);
        em /= em.sum();
        if (objective_only(a, em) <= e.objective) break;
        pi = em;
        continue;
      }
      double t = 1.0;
      Eigen::VectorXd trial;
      bool accepted = false;
      for (int h2 = 0; h2 < 60; ++h2, t *= 0.5) {
        trial = pi + t * dir;
        const auto et = evaluate(a, trial);
        if (!std::isfinite(et.objective)) continue;
        // Near the optimum the gain is below the rounding of f; f is concave
        // along the segment, so a nonnegative slope at the trial point also
        // proves f(trial) >= f(pi).
        const double trial_slope = dir.dot((et.colmean.array() - 1.0).matrix());
        if (et.objective >= e.objective + 1e-4 * t * slope || trial_slope >= 0.0) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      pi = trial.cwiseMax(0.0);
      pi /= pi.sum();
    }
  }
  const auto e = evaluate(a, pi);
  fill_certificate(e, pi, cert);
  cert.objective = e.objective + shift;
  cert.iterations = iter;

  // Spread representative mass over duplicate columns.
  std::vector<double> weights(kfull, 0.0);
  std::vector<int> group_size(kfull, 0);
  for (Eigen::Index j = 0; j < kfull; ++j) ++group_size[rep_of[j]];
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index j = 0; j < kfull; ++j)
      if (rep_of[j] == reps[r]) weights[j] = pi[r] / group_size[reps[r]];
  }

  if (!certified(cert, opts.tolerance)) {
    throw FitError("mixture weight optimization stopped without a KKT certificate", weights,
                   cert.objective, cert.max_dual_residual);
  }
  return {std::move(weights), cert};
}

MixtureFit fit_nonparametric(const ObservationSet& obs, const PriorFamilySpec& spec) {
  spec.validate();
  MixturePrior grid;
  std::optional<std::vector<double>> init;
  if (spec.g_init && !spec.g_init->is_parametric()) {
    grid = spec.g_init->mixture();
    init = grid.weights;
  } else {
    grid = build_grid(spec, obs);
  }
  const auto lik = likelihood_matrix(obs, grid.components);
  auto wf = optimize_weights(lik, init);

  std::vector<Component> comps;
  std::vector<double> weights;
  double kept = 0.0;
  for (std::size_t k = 0; k < grid.components.size(); ++k) {
    if (wf.weights[k] < kPruneTol) continue;
    comps.push_back(grid.components[k]);
    weights.push_back(wf.weights[k]);
    kept += wf.weights[k];
  }
  for (double& w : weights) w /= kept;
  MixtureFit out;
  out.prior = make_mixture(grid.kind, std::move(comps), std::move(weights));
  out.cert = wf.cert;
  out.log_likelihood = 0.0;
  const auto pruned = likelihood_matrix(obs, out.prior.components);
  out.log_likelihood = mixture_objective(pruned, out.prior.weights) * static_cast<double>(obs.size());
  return out;
}

}  // namespace ebnm
