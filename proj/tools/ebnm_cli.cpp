// Command-line front end: fit, benchmark, simulate, eightschools.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ebnm/bench.hpp"
#include "ebnm/ebnm.hpp"
#include "ebnm/table_io.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kFit = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ebnm::Mode parse_mode(const std::string& text) {
  if (text == "estimate") return ebnm::Mode::estimate();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw UsageError("bad --mode value: " + text);
    return ebnm::Mode::fixed(v);
  } catch (const std::logic_error&) {
    throw UsageError("bad --mode value: " + text);
  }
}

ebnm::ScaleSpec parse_scale(const std::string& text) {
  if (text.empty()) return ebnm::DefaultScale{};
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw UsageError("bad --scale entry: " + item);
    } catch (const std::logic_error&) {
      throw UsageError("bad --scale entry: " + item);
    }
  }
  if (values.size() == 1) return values.front();
  return values;
}

ebnm::Family parse_family_flag(const std::string& name) {
  const auto f = ebnm::parse_family(name);
  if (!f) throw UsageError("unknown prior family: " + name);
  return *f;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ebnm::DataError("cannot write " + path.string());
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ebnm::DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct FitArgs {
  std::string input;
  std::string prior = "point-normal";
  std::string mode = "0";
  std::string scale;
  std::string g_init;
  bool fix_g = false;
  std::uint64_t seed = 1;
  std::size_t nsamp = 0;
  std::string output = ".";
  std::optional<double> s;
};

int cmd_fit(const FitArgs& a) {
  ebnm::PriorFamilySpec spec;
  spec.family = parse_family_flag(a.prior);
  spec.mode = parse_mode(a.mode);
  spec.scale = parse_scale(a.scale);
  spec.fix_g = a.fix_g;
  if (!a.g_init.empty()) spec.g_init = ebnm::fitted_prior_from_json(read_file(a.g_init));
  if (spec.mode.is_estimate() && spec.family != ebnm::Family::normal &&
      spec.family != ebnm::Family::point_normal && spec.family != ebnm::Family::point_laplace)
    throw UsageError("mode estimation is not supported for " + a.prior);
  if (spec.fix_g && !spec.g_init) throw UsageError("--fix-g requires --g-init");
  spec.validate();

  const auto obs = ebnm::read_observations(a.input, a.s);
  auto res = ebnm::solve(obs, spec, a.seed);

  fs::create_directories(a.output);
  const fs::path out(a.output);
  write_file(out / "fitted_prior.json", ebnm::to_json(res.fitted_prior) + "\n");
  write_file(out / "posterior.csv", ebnm::posterior_csv(obs, res.posterior));
  write_file(out / "loglik.txt", ebnm::format_double(res.log_likelihood) + "\n");
  if (a.nsamp > 0) write_file(out / "samples.csv", ebnm::samples_csv(res.sampler.draw(a.nsamp)));
  std::cout << "family " << ebnm::to_string(res.fitted_prior.family) << ", log-likelihood "
            << ebnm::format_double(res.log_likelihood) << "\n";
  return kOk;
}

struct BenchArgs {
  std::string scenario = "point-normal";
  std::size_t n = 1000;
  int reps = 10;
  std::uint64_t seed = 1;
  std::string families;
  std::string out = ".";
  std::size_t nsamp = 10000;
};

int cmd_benchmark(const BenchArgs& a) {
  ebnm::BenchmarkConfig cfg;
  const auto sc = ebnm::parse_scenario(a.scenario);
  if (!sc) throw UsageError("unknown scenario: " + a.scenario);
  cfg.scenario = *sc;
  cfg.n = a.n;
  cfg.reps = a.reps;
  cfg.seed = a.seed;
  cfg.nsamp = a.nsamp;
  if (a.n == 0 || a.reps <= 0) throw UsageError("--n and --reps must be positive");
  if (!a.families.empty()) {
    cfg.families.clear();
    std::stringstream ss(a.families);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.families.push_back(parse_family_flag(item));
  }
  const auto report = ebnm::run_benchmark(cfg);
  fs::create_directories(a.out);
  const auto csv = ebnm::metrics_csv(report);
  write_file(fs::path(a.out) / "metrics.csv", csv);
  std::cout << "family,mean_rel_loglik,mean_rmse,mean_coverage90\n";
  for (const auto& m : report.means) {
    std::cout << ebnm::to_string(m.metrics.family) << "," << ebnm::format_double(m.metrics.rel_loglik) << ","
              << ebnm::format_double(m.metrics.rmse) << "," << ebnm::format_double(m.metrics.coverage90) << "\n";
  }
  return kOk;
}

struct SimArgs {
  std::string scenario = "point-normal";
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::string out = "simulated.csv";
};

int cmd_simulate(const SimArgs& a) {
  const auto sc = ebnm::parse_scenario(a.scenario);
  if (!sc) throw UsageError("unknown scenario: " + a.scenario);
  if (a.n == 0) throw UsageError("--n must be positive");
  const auto t = ebnm::simulate_scenario(*sc, a.n, a.seed);
  std::string text = "x,s,theta\n";
  for (std::size_t i = 0; i < t.x.size(); ++i)
    text += ebnm::format_double(t.x[i]) + "," + ebnm::format_double(t.s[i]) + "," + ebnm::format_double(t.theta[i]) + "\n";
  write_file(a.out, text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical Bayes normal means: fit priors, summarize posteriors, run the simulation study"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a prior family to a CSV/TSV file with columns x[,s]");
  fit_cmd->add_option("input", fit.input, "Input file")->required();
  fit_cmd->add_option("--prior", fit.prior,
                      "normal|point-normal|point-laplace|point-exponential|smn|symm-u|unimodal|unimodal-nn|"
                      "unimodal-np|npmle");
  fit_cmd->add_option("--mode", fit.mode, "Prior mode: a number or 'estimate'");
  fit_cmd->add_option("--scale", fit.scale, "Fixed scale or comma-separated grid");
  fit_cmd->add_option("--g-init", fit.g_init, "Initial prior (fitted_prior.json)");
  fit_cmd->add_flag("--fix-g", fit.fix_g, "Keep --g-init fixed");
  fit_cmd->add_option("--seed", fit.seed, "Sampler seed");
  fit_cmd->add_option("--nsamp", fit.nsamp, "Posterior draws to write to samples.csv");
  fit_cmd->add_option("--output", fit.output, "Output directory");
  fit_cmd->add_option("--s", fit.s, "Standard error for every observation when the file has no s column");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Replicated simulation study");
  bench_cmd->add_option("--scenario", bench.scenario, "point-normal|point-t|tophat");
  bench_cmd->add_option("--n", bench.n, "Observations per data set");
  bench_cmd->add_option("--reps", bench.reps, "Number of simulated data sets");
  bench_cmd->add_option("--seed", bench.seed, "Base seed");
  bench_cmd->add_option("--families", bench.families, "Comma-separated prior families");
  bench_cmd->add_option("--out", bench.out, "Output directory for metrics.csv");
  bench_cmd->add_option("--nsamp", bench.nsamp, "Posterior draws per fit for credible intervals");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Write one simulated data set (x,s,theta)");
  sim_cmd->add_option("--scenario", sim.scenario, "point-normal|point-t|tophat");
  sim_cmd->add_option("--n", sim.n, "Number of observations");
  sim_cmd->add_option("--seed", sim.seed, "Seed");
  sim_cmd->add_option("--out", sim.out, "Output CSV path");

  auto* eight_cmd = app.add_subcommand("eightschools", "Point-normal analysis of the eight schools data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit);
    if (*bench_cmd) return cmd_benchmark(bench);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*eight_cmd) {
      std::cout << ebnm::eight_schools().text;
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ebnm::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const ebnm::FitError& e) {
    std::cerr << "fit failed: " << e.what() << "\n";
    return kFit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
