#include "ebnm/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include "ebnm/ebnm.hpp"

namespace ebnm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TaskResult {
  bool ok = false;
  FamilyOutcome outcome;
  double max_dual_residual = kNaN;
};

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double rmse(const std::vector<double>& estimate, const std::vector<double>& truth) {
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) acc += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
  return std::sqrt(acc / static_cast<double>(truth.size()));
}

double coverage(const std::vector<Interval>& intervals, const std::vector<double>& truth) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (intervals[i].lower <= truth[i] && truth[i] <= intervals[i].upper) ++hit;
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

std::vector<MetricsRow> compute_metrics(const SimulationTruth& truth,
                                        const std::vector<FamilyOutcome>& outcomes) {
  double reference = kNaN;
  for (const auto& o : outcomes)
    if (o.family == Family::npmle) reference = o.log_likelihood;
  std::vector<MetricsRow> rows;
  for (const auto& o : outcomes) {
    rows.push_back({o.family, o.log_likelihood - reference, rmse(o.posterior_mean, truth.theta),
                    coverage(o.intervals, truth.theta)});
  }
  return rows;
}

std::vector<Family> default_benchmark_families() {
  return {Family::normal,
          Family::point_normal,
          Family::point_laplace,
          Family::normal_scale_mixture,
          Family::unimodal_symmetric,
          Family::npmle};
}

unsigned benchmark_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("EBNM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  const std::size_t nfam = config.families.size();
  const auto reps = static_cast<std::size_t>(config.reps);

  std::vector<SimulationTruth> truths;
  truths.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r)
    truths.push_back(simulate_scenario(config.scenario, config.n, config.seed + r));

  std::vector<TaskResult> results(reps * nfam);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < results.size(); task = next++) {
      const std::size_t rep = task / nfam, f = task % nfam;
      const auto& truth = truths[rep];
      auto& slot = results[task];
      try {
        const auto obs = validate_observations(truth.x, truth.s);
        PriorFamilySpec spec;
        spec.family = config.families[f];
        spec.mode = Mode::fixed(0.0);
        const std::uint64_t sampler_seed = (config.seed + rep) * 1000003ULL + f;
        auto res = solve(obs, spec, sampler_seed);
        slot.outcome = {spec.family, res.log_likelihood, res.posterior.mean,
                        credible_intervals(res.sampler, config.nsamp, config.level)};
        if (res.kkt) slot.max_dual_residual = res.kkt->max_dual_residual;
        slot.ok = true;
      } catch (const std::exception&) {
        slot.ok = false;
      }
    }
  };
  const unsigned nthreads = std::min<unsigned>(benchmark_threads(config.threads),
                                               static_cast<unsigned>(std::max<std::size_t>(1, results.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BenchmarkReport report;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    std::vector<FamilyOutcome> ok;
    for (std::size_t f = 0; f < nfam; ++f)
      if (results[rep * nfam + f].ok) ok.push_back(results[rep * nfam + f].outcome);
    const auto metrics = compute_metrics(truths[rep], ok);
    std::size_t m = 0;
    for (std::size_t f = 0; f < nfam; ++f) {
      const auto& res = results[rep * nfam + f];
      if (res.ok) {
        report.rows.push_back({static_cast<int>(rep), metrics[m++], res.outcome.log_likelihood,
                               res.max_dual_residual});
      } else {
        report.rows.push_back({static_cast<int>(rep), {config.families[f], kNaN, kNaN, kNaN}, kNaN, kNaN});
      }
    }
  }

  for (std::size_t f = 0; f < nfam; ++f) {
    BenchmarkRow mean{-1, {config.families[f], 0.0, 0.0, 0.0}, 0.0, kNaN};
    double count = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto& row = report.rows[rep * nfam + f];
      if (std::isnan(row.log_likelihood)) continue;
      mean.metrics.rel_loglik += row.metrics.rel_loglik;
      mean.metrics.rmse += row.metrics.rmse;
      mean.metrics.coverage90 += row.metrics.coverage90;
      mean.log_likelihood += row.log_likelihood;
      count += 1.0;
    }
    const double r = count > 0.0 ? count : kNaN;
    mean.metrics.rel_loglik /= r;
    mean.metrics.rmse /= r;
    mean.metrics.coverage90 /= r;
    mean.log_likelihood /= r;
    report.means.push_back(mean);
  }
  return report;
}

std::string metrics_csv(const BenchmarkReport& report) {
  std::string out = "rep,family,rel_loglik,rmse,coverage90\n";
  auto emit = [&](const std::string& rep, const MetricsRow& m) {
    out += rep + "," + std::string(to_string(m.family)) + "," + format_number(m.rel_loglik) + "," +
           format_number(m.rmse) + "," + format_number(m.coverage90) + "\n";
  };
  for (const auto& row : report.rows) emit(std::to_string(row.rep), row.metrics);
  for (const auto& row : report.means) emit("mean", row.metrics);
  return out;
}

}  // namespace ebnm
