#pragma once

// Simulation scenarios, accuracy metrics and the replicated simulation study.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ebnm/posterior.hpp"
#include "ebnm/prior.hpp"

namespace ebnm {

enum class Scenario { point_normal, point_t, tophat };

std::string_view to_string(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

struct SimulationTruth {
  std::vector<double> theta;
  std::vector<double> x;
  std::vector<double> s;
  Scenario scenario;
  std::uint64_t seed;
};

/// theta_i from the scenario prior, x_i = theta_i + N(0, 1) noise:
///   point-normal  0.9 delta_0 + 0.1 N(0, 2^2)
///   point-t       0.8 delta_0 + 0.2 (1.5 t_5)
///   tophat        0.5 delta_0 + 0.5 Unif[-5, 10]
SimulationTruth simulate_scenario(Scenario scenario, std::size_t n, std::uint64_t seed);

/// One family's outcome on a simulated data set.
struct FamilyOutcome {
  Family family;
  double log_likelihood;
  std::vector<double> posterior_mean;
  std::vector<Interval> intervals;
};

struct MetricsRow {
  Family family;
  double rel_loglik;  // log-likelihood minus the NPMLE log-likelihood (NaN when absent)
  double rmse;
  double coverage90;
};

/// sqrt(mean((theta_hat - theta)^2)).
double rmse(const std::vector<double>& estimate, const std::vector<double>& truth);
double coverage(const std::vector<Interval>& intervals, const std::vector<double>& truth);

std::vector<MetricsRow> compute_metrics(const SimulationTruth& truth,
                                        const std::vector<FamilyOutcome>& outcomes);

/// Families compared in the simulation study: the symmetric families and
/// the NPMLE.
std::vector<Family> default_benchmark_families();

struct BenchmarkConfig {
  Scenario scenario = Scenario::point_normal;
  std::size_t n = 1000;
  int reps = 10;
  std::uint64_t seed = 1;
  std::vector<Family> families = default_benchmark_families();
  std::size_t nsamp = 10000;
  double level = 0.9;
  unsigned threads = 0;  // 0: EBNM_THREADS or the hardware concurrency
};

struct BenchmarkRow {
  int rep;  // -1 for the mean over reps
  MetricsRow metrics;
  double log_likelihood;
  double max_dual_residual;  // NaN for parametric families
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;  // per rep, in (rep, family) order
  std::vector<BenchmarkRow> means;
};

/// Fits every family on `reps` simulated data sets (seed + rep). Fit
/// failures become NaN rows. Output is independent of the thread count.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

/// metrics.csv text: header rep,family,rel_loglik,rmse,coverage90; mean rows
/// use rep = "mean"; NaN is written as NA.
std::string metrics_csv(const BenchmarkReport& report);

unsigned benchmark_threads(unsigned requested);

/// Rubin's eight schools: treatment effect estimates and standard errors.
inline const std::vector<double> kEightSchoolsX{28, 8, -3, 7, -1, 1, 18, 12};
inline const std::vector<double> kEightSchoolsS{15, 10, 16, 11, 9, 11, 10, 18};

struct EightSchoolsReport {
  FittedPrior mode_zero;
  FittedPrior mode_estimated;
  double loglik_mode_zero;
  double loglik_mode_estimated;
  double loglik_difference;
  double likelihood_ratio;
  std::string text;
};

/// Point-normal fits with the mode fixed at zero and estimated.
EightSchoolsReport eight_schools();

}  // namespace ebnm
