// Acceptance report: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ebnm/bench.hpp"
#include "ebnm/ebnm.hpp"
#include "ebnm/kernels.hpp"
#include "ebnm/mix_fit.hpp"
#include "ebnm/param_fit.hpp"
#include "kernel_cases.hpp"
#include "mix_oracle.hpp"

using namespace ebnm;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const char* title, bool ok, double secs, const std::string& detail) {
  std::printf("[%s] %d. %s (%.2f s): %s\n", ok ? "PASS" : "FAIL", id, title, secs, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PriorFamilySpec spec_for(Family f) {
  PriorFamilySpec spec;
  spec.family = f;
  return spec;
}

void eight_schools_check() {
  const auto t0 = Clock::now();
  const auto r = eight_schools();
  const double secs = seconds_since(t0);
  const double mu = r.mode_estimated.parametric().mu;
  const bool ok = r.mode_zero.parametric().is_point_mass() && r.mode_estimated.parametric().is_point_mass() &&
                  mu >= 7.5 && mu <= 7.9 && r.loglik_difference >= 1.6 && r.loglik_difference <= 2.0 &&
                  r.likelihood_ratio >= 5.0 && r.likelihood_ratio <= 7.5 && secs < 1.0;
  report(1, "eight schools", ok, secs,
         fmt("mu=%.4f dloglik=%.4f ratio=%.4f point masses=%d", mu, r.loglik_difference, r.likelihood_ratio,
             r.mode_zero.parametric().is_point_mass() && r.mode_estimated.parametric().is_point_mass()));
}

// Normal prior with homoskedastic s: mu = mean(x), sigma^2 = max(0, var(x) - s^2).
void closed_form_check() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  double worst_mu = 0, worst_var = 0, worst_ll = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const double s = 0.3 + 2.0 * u(rng), mu = -5.0 + 10.0 * u(rng);
    const double sigma2 = rep % 10 == 0 ? 0.0 : 4.0 * u(rng);
    std::vector<double> x(500);
    for (auto& v : x) v = mu + std::sqrt(sigma2) * z(rng) + s * z(rng);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= 500.0;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double var_hat = std::max(0.0, ss / 500.0 - s * s);
    const double tot = var_hat + s * s;
    double ll = 0.0;
    for (double v : x) ll += -0.5 * std::log(2.0 * std::numbers::pi * tot) - 0.5 * (v - mean) * (v - mean) / tot;

    const auto fit = fit_normal(validate_observations(x, s), Mode::estimate(), NormalFitMethod::numeric);
    worst_mu = std::max(worst_mu, std::fabs(fit.prior.mu - mean));
    worst_var = std::max(worst_var, std::fabs(fit.prior.scale - var_hat));
    worst_ll = std::max(worst_ll, std::fabs(fit.log_likelihood - ll));
  }
  const double secs = seconds_since(t0);
  report(2, "closed-form equivalence", worst_mu <= 1e-6 && worst_var <= 1e-6 && worst_ll <= 1e-8 && secs < 10.0,
         secs, fmt("max |dmu|=%.2e |dsigma2|=%.2e |dloglik|=%.2e over 100 datasets", worst_mu, worst_var, worst_ll));
}

// Log marginals are compared on the log scale (relative error of the
// density); means relative to max(|mean|, sd) since means can vanish.
void kernel_oracle_check() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int tails = 0, bad = 0;
  for (auto kind : {cases::Kind::point, cases::Kind::normal, cases::Kind::laplace, cases::Kind::exponential,
                    cases::Kind::uniform}) {
    auto cs = cases::random_cases(kind, 1000, 1000 + static_cast<int>(kind));
    for (auto& c : cs) {
      const auto ref = cases::quadrature(c);
      const auto post = kernels::component_posterior(c.x, c.s, c.component);
      const double sd = std::sqrt(std::max(0.0, ref.second_moment - ref.mean * ref.mean));
      const double e = std::max({std::fabs(kernels::log_marginal(c.x, c.s, c.component) - ref.log_marginal),
                                 std::fabs(post.mean - ref.mean) / std::max(std::fabs(ref.mean), sd),
                                 std::fabs(post.second_moment - ref.second_moment) / ref.second_moment,
                                 std::fabs(post.prob_negative - ref.prob_negative),
                                 std::fabs(post.prob_positive - ref.prob_positive)});
      worst = std::max(worst, e);
      bad += !(e <= 1e-8);
      tails += std::fabs(c.x) / c.s >= 8.0;
    }
  }
  const double secs = seconds_since(t0);
  report(3, "kernel oracle suite", bad == 0 && secs < 60.0, secs,
         fmt("5000 cases (%d with |x|/s >= 8), %d above 1e-8, worst relative error %.2e", tails, bad, worst));
}

void gradient_check() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  std::vector<double> x(80), s(80);
  for (std::size_t i = 0; i < x.size(); ++i) {
    s[i] = 0.5 + u(rng);
    x[i] = (u(rng) < 0.5 ? 0.0 : 2.0 * z(rng)) + s[i] * z(rng);
  }
  const auto obs = validate_observations(x, s);
  struct Case {
    const char* name;
    SlabKind slab;
    bool pure_slab;
  };
  double worst = 0.0;
  int bad = 0, checks = 0;
  for (const Case& fam : {Case{"normal", SlabKind::normal, true}, Case{"point-normal", SlabKind::normal, false},
                          Case{"point-laplace", SlabKind::laplace, false},
                          Case{"point-exponential", SlabKind::exponential, false}}) {
    ParamLayout layout;
    layout.free_gamma = fam.slab != SlabKind::exponential;
    if (fam.pure_slab) {
      layout.free_alpha = false;
      layout.fixed.alpha = std::numeric_limits<double>::infinity();
    }
    SpikeSlabObjective f(obs, fam.slab, layout);
    for (int k = 0; k < 100; ++k) {
      TransformedParams t{-4.0 + 8.0 * u(rng), -2.0 + 4.0 * u(rng), -1.0 + 2.0 * u(rng)};
      const Eigen::VectorXd p = layout.pack(t);
      Eigen::VectorXd g;
      f(p, &g);
      for (Eigen::Index j = 0; j < p.size(); ++j) {
        Eigen::VectorXd hi = p, lo = p;
        hi[j] += 1e-6;
        lo[j] -= 1e-6;
        const double fd = (f(hi, nullptr) - f(lo, nullptr)) / 2e-6;
        const double e = std::fabs(g[j] - fd) / std::max(1.0, std::fabs(fd));
        worst = std::max(worst, e);
        bad += !(e <= 1e-5);
        ++checks;
      }
    }
  }
  report(7, "gradient check", bad == 0, seconds_since(t0),
         fmt("%d partial derivatives at 400 points, %d above 1e-5, worst %.2e", checks, bad, worst));
}

void nesting_check() {
  const auto t0 = Clock::now();
  const Family chain[] = {Family::normal, Family::point_normal, Family::normal_scale_mixture,
                          Family::unimodal_symmetric, Family::npmle};
  bool ok = true;
  std::string detail;
  for (Scenario sc : {Scenario::point_normal, Scenario::point_t, Scenario::tophat}) {
    const auto truth = simulate_scenario(sc, 1000, 1);
    const auto obs = validate_observations(truth.x, truth.s);
    std::vector<double> ll;
    for (Family f : chain) ll.push_back(fit_prior(obs, spec_for(f)).log_likelihood);
    double violation = 0.0;
    for (std::size_t k = 1; k < ll.size(); ++k) violation += std::max(0.0, ll[k - 1] - ll[k]);
    ok = ok && violation <= 1.0;
    detail += fmt("%s: %.2f <= %.2f <= %.2f <= %.2f <= %.2f (total violation %.3f); ",
                  std::string(to_string(sc)).c_str(), ll[0], ll[1], ll[2], ll[3], ll[4], violation);
  }
  detail.resize(detail.size() - 2);
  report(5, "nesting", ok, seconds_since(t0), detail);
}

void sampler_check() {
  const auto t0 = Clock::now();
  const auto truth = simulate_scenario(Scenario::tophat, 200, 17);
  const auto obs = validate_observations(truth.x, truth.s);
  const std::size_t nsamp = 20000;
  std::vector<double> buf(nsamp);
  int bad_mean = 0, bad_var = 0, bad_lfsr = 0, checks = 0;
  double worst_lfsr = 0.0;
  for (Family f : kAllFamilies) {
    const auto res = solve(obs, spec_for(f), 23);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      res.sampler.draw_column(i, nsamp, 0, buf.data());
      const auto col = Eigen::Map<const Eigen::ArrayXd>(buf.data(), static_cast<Eigen::Index>(nsamp));
      const double m = col.mean();
      const double var = (col - m).square().sum() / (nsamp - 1);
      const double m4 = (col - m).pow(4).mean();
      const double sd = res.posterior.sd[i];
      bad_mean += std::fabs(m - res.posterior.mean[i]) > 5.0 * std::sqrt(var / nsamp) + 1e-12;
      bad_var += std::fabs(var - sd * sd) > 5.0 * std::sqrt(std::max(0.0, m4 - var * var) / nsamp) + 1e-12;
      const double le = (col <= 0.0).cast<double>().mean(), ge = (col >= 0.0).cast<double>().mean();
      const double e = std::fabs(std::min(le, ge) - res.posterior.lfsr[i]);
      worst_lfsr = std::max(worst_lfsr, e);
      bad_lfsr += e > 0.01;
      ++checks;
    }
  }
  report(8, "sampler agreement", bad_mean + bad_var + bad_lfsr == 0, seconds_since(t0),
         fmt("%d observation/family pairs; outside 5 SE: mean %d, variance %d; lfsr outside 0.01: %d (worst %.4f)",
             checks, bad_mean, bad_var, bad_lfsr, worst_lfsr));
}

struct StudyOutcome {
  std::vector<BenchmarkReport> reports;  // one per scenario
  double seconds = 0.0;
};

StudyOutcome run_study() {
  StudyOutcome out;
  const auto t0 = Clock::now();
  for (Scenario sc : {Scenario::point_normal, Scenario::point_t, Scenario::tophat}) {
    BenchmarkConfig cfg;
    cfg.scenario = sc;
    cfg.n = 1000;
    cfg.reps = 10;
    cfg.seed = 1;
    cfg.families.push_back(Family::unimodal);  // reported, outside the criterion set
    out.reports.push_back(run_benchmark(cfg));
  }
  out.seconds = seconds_since(t0);
  return out;
}

bool symmetric_family(Family f) {
  return f == Family::normal || f == Family::point_normal || f == Family::point_laplace ||
         f == Family::normal_scale_mixture || f == Family::unimodal_symmetric;
}

void kkt_check(const StudyOutcome& study) {
  const auto t0 = Clock::now();
  int fits = 0, bad = 0;
  double worst = 0.0;
  for (const auto& rep : study.reports) {
    for (const auto& row : rep.rows) {
      if (is_parametric(row.metrics.family)) continue;
      ++fits;
      // A failed fit leaves NaN, which counts as uncertified.
      if (!(row.max_dual_residual <= 1e-8)) ++bad;
      if (std::isfinite(row.max_dual_residual)) worst = std::max(worst, row.max_dual_residual);
    }
  }
  std::mt19937_64 rng(404);
  double worst_em = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto lik = mix_oracle::random_problem(rng, 20 + rep, 2 + rep % 4);
    const Eigen::MatrixXd l = lik.normalized();
    const auto oracle = mix_oracle::long_em(l, 100000);
    const auto fit = optimize_weights(lik);
    worst_em = std::max(worst_em,
                        std::fabs(fit.cert.objective - (mix_oracle::mean_loglik(l, oracle) + lik.row_max.mean())));
  }
  report(4, "KKT certification", bad == 0 && worst_em <= 1e-6, seconds_since(t0),
         fmt("%d benchmark fits, %d uncertified, max dual residual %.2e; 20 small problems, max |objective - long EM| "
             "%.2e",
             fits, bad, worst, worst_em));
}

void study_check(const StudyOutcome& study) {
  bool a = true, b = true, c = true, d = true;
  std::string detail;
  const Scenario scenarios[] = {Scenario::point_normal, Scenario::point_t, Scenario::tophat};
  for (std::size_t si = 0; si < 3; ++si) {
    const auto& means = study.reports[si].means;
    double normal_rmse = NAN, other_best_worst = -INFINITY;
    double min_cov = INFINITY, max_cov = -INFINITY, min_deficit = INFINITY;
    for (const auto& m : means) {
      const auto& r = m.metrics;
      if (r.family == Family::unimodal) continue;
      a = a && r.rmse < 1.0;
      if (r.family == Family::normal) {
        normal_rmse = r.rmse;
      } else {
        other_best_worst = std::max(other_best_worst, r.rmse);
      }
      if (r.family != Family::npmle) {
        c = c && r.coverage90 >= 0.80 && r.coverage90 <= 0.97;
        min_cov = std::min(min_cov, r.coverage90);
        max_cov = std::max(max_cov, r.coverage90);
      }
      if (scenarios[si] == Scenario::tophat && symmetric_family(r.family)) {
        d = d && -r.rel_loglik > 10.0;
        min_deficit = std::min(min_deficit, -r.rel_loglik);
      }
    }
    if (scenarios[si] != Scenario::point_normal) b = b && normal_rmse > other_best_worst;
    detail += fmt("\n      %s:", std::string(to_string(scenarios[si])).c_str());
    for (const auto& m : means)
      detail += fmt(" %s%s rmse=%.3f cov=%.3f rel=%.1f;", m.metrics.family == Family::unimodal ? "(extra) " : "",
                    std::string(cli_name(m.metrics.family)).c_str(), m.metrics.rmse, m.metrics.coverage90, m.metrics.rel_loglik);
    detail += fmt(" non-NPMLE coverage [%.3f, %.3f]", min_cov, max_cov);
    if (scenarios[si] == Scenario::tophat) detail += fmt(", smallest symmetric deficit %.1f", min_deficit);
  }
  const bool ok = a && b && c && d && study.seconds < 600.0;
  report(6, "simulation study", ok, study.seconds,
         fmt("(a) rmse<1 %s, (b) normal worst %s, (c) coverage %s, (d) tophat deficits %s", a ? "yes" : "no",
             b ? "yes" : "no", c ? "yes" : "no", d ? "yes" : "no") +
             detail);
}

}  // namespace

int main() {
  std::printf("threads: %u\n", benchmark_threads(0));
  eight_schools_check();
  closed_form_check();
  kernel_oracle_check();
  const auto study = run_study();
  kkt_check(study);
  nesting_check();
  study_check(study);
  gradient_check();
  sampler_check();
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
