#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "ebnm/bench.hpp"
#include "ebnm/ebnm.hpp"
#include "ebnm/error.hpp"
#include "ebnm/param_fit.hpp"
#include "ebnm/posterior.hpp"
#include "quadrature_oracle.hpp"

using namespace ebnm;

namespace {

FittedPrior delta0() { return {Family::point_normal, make_parametric(0.0, 1.0, 0.0)}; }
FittedPrior std_normal() { return {Family::normal, make_parametric(0.0, 0.0, 1.0)}; }

// Normal density carrying its own log weight: par = {mean, variance, log w}.
double weighted_normal(double t, const double* p) {
  return p[2] + oracle::normal_density(t, p);
}

PriorFamilySpec spec_for(Family f) {
  PriorFamilySpec spec;
  spec.family = f;
  return spec;
}

}  // namespace

TEST_CASE("posterior summary examples") {
  auto obs = validate_observations({-3.0, 0.0, 5.0}, 1.0);
  const auto d = posterior_summary(obs, delta0());
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(d.mean[i] == 0.0);
    CHECK(d.sd[i] == 0.0);
    CHECK(d.lfsr[i] == 1.0);
  }

  const auto n = posterior_summary(validate_observations({2.0}, 1.0), std_normal());
  CHECK(n.mean[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(n.sd[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  // 0.9 delta0 + 0.1 N(0, 4) at x = 0, cross-checked by quadrature.
  const FittedPrior pn{Family::point_normal, make_parametric(0.0, 0.9, 4.0)};
  const auto p = posterior_summary(validate_observations({0.0}, 1.0), pn);
  const double par[3] = {0.0, 4.0, std::log(0.1)};
  std::vector<oracle::Piece> pieces{{0.0, 0.0, nullptr, nullptr, std::log(0.9)},
                                    {-oracle::kInf, oracle::kInf, weighted_normal, par}};
  const auto q = oracle::posterior_by_quadrature(0.0, 1.0, pieces);
  const double ref = std::min(q.prob_negative + q.prob_zero, q.prob_positive + q.prob_zero);
  CHECK(p.lfsr[0] >= 0.9);
  CHECK(std::fabs(p.lfsr[0] - ref) <= 1e-10);
}

TEST_CASE("posterior moments of a mixture match quadrature") {
  const FittedPrior pn{Family::point_normal, make_parametric(0.0, 0.6, 2.5)};
  const double par[3] = {0.0, 2.5, std::log(0.4)};
  for (double x : {-4.0, -0.7, 0.0, 1.3, 6.0}) {
    const auto p = posterior_summary(validate_observations({x}, 0.8), pn);
    std::vector<oracle::Piece> pieces{{0.0, 0.0, nullptr, nullptr, std::log(0.6)},
                                      {-oracle::kInf, oracle::kInf, weighted_normal, par}};
    const auto q = oracle::posterior_by_quadrature(x, 0.8, pieces);
    CHECK(p.mean[0] == doctest::Approx(q.mean).epsilon(1e-9));
    CHECK(p.second_moment[0] == doctest::Approx(q.second_moment).epsilon(1e-9));
    CHECK(std::fabs(log_likelihood(validate_observations({x}, 0.8), pn) - q.log_marginal) <= 1e-9);
  }
}

TEST_CASE("log-likelihood examples") {
  CHECK(log_likelihood(validate_observations({0.0}, 1.0), delta0()) == doctest::Approx(-0.918939).epsilon(1e-6));

  auto eight = validate_observations(kEightSchoolsX, kEightSchoolsS);
  const auto zero = fit_point_normal(eight, Mode::fixed(0.0));
  const auto est = fit_point_normal(eight, Mode::estimate());
  const double diff = log_likelihood(eight, {Family::point_normal, est.prior}) -
                      log_likelihood(eight, {Family::point_normal, zero.prior});
  CHECK(diff >= 1.6);
  CHECK(diff <= 2.0);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  std::vector<double> x(30);
  for (auto& v : x) v = 2.0 * z(rng);
  auto obs = validate_observations(x, 1.0);
  const FittedPrior one{Family::normal_scale_mixture,
                        make_mixture(MixtureKind::zero_mean_normal, {NormalComponent{0.0, 3.0}}, {1.0})};
  double direct = 0.0;
  for (double v : x) direct += -0.5 * v * v / 4.0 - 0.5 * std::log(2.0 * std::numbers::pi * 4.0);
  CHECK(log_likelihood(obs, one) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("log-likelihood equals the optimizer objective") {
  const auto truth = simulate_scenario(Scenario::point_t, 400, 3);
  auto obs = validate_observations(truth.x, truth.s);
  const auto pn = fit_point_normal(obs, Mode::fixed(0.0));
  CHECK(std::fabs(log_likelihood(obs, {Family::point_normal, pn.prior}) - pn.log_likelihood) <= 1e-9);
  const auto pl = fit_point_laplace(obs, Mode::estimate());
  CHECK(std::fabs(log_likelihood(obs, {Family::point_laplace, pl.prior}) - pl.log_likelihood) <= 1e-9);
  const auto pe = fit_point_exponential(obs);
  CHECK(std::fabs(log_likelihood(obs, {Family::point_exponential, pe.prior}) - pe.log_likelihood) <= 1e-9);
}

TEST_CASE("sampler examples") {
  auto obs = validate_observations({-2.0, 0.0, 4.0}, 1.0);
  const auto zeros = posterior_sample(obs, delta0(), 500, 1);
  CHECK((zeros.array() == 0.0).all());

  const std::size_t nsamp = 100000;
  const auto draws = posterior_sample(validate_observations({2.0}, 1.0), std_normal(), nsamp, 11);
  CHECK(std::fabs(draws.col(0).mean() - 1.0) <= 4.0 * (1.0 / std::sqrt(2.0)) / std::sqrt(double(nsamp)));

  const FittedPrior pl{Family::point_laplace, make_parametric(0.0, 0.5, 0.7)};
  const auto a = posterior_sample(obs, pl, 300, 7);
  const auto b = posterior_sample(obs, pl, 300, 7);
  CHECK((a.array() == b.array()).all());
  // Successive calls advance the stream; equal seeds replay the same sequence.
  PosteriorSampler s1(obs, pl, 7), s2(obs, pl, 7);
  const auto first = s1.draw(50), second = s1.draw(50);
  CHECK((first.array() != second.array()).any());
  CHECK((s2.draw(50).array() == first.array()).all());
  CHECK((s2.draw(50).array() == second.array()).all());
}

TEST_CASE("sampler stays exact far into a tail") {
  // Uniform slab on [0, 1] with x = 40: the posterior hugs the upper edge.
  const FittedPrior g{Family::unimodal_nonnegative,
                      make_mixture(MixtureKind::uniform, {UniformComponent{0.0, 1.0}}, {1.0})};
  auto obs = validate_observations({40.0}, 1.0);
  const auto draws = posterior_sample(obs, g, 20000, 3);
  CHECK(draws.minCoeff() >= 0.0);
  CHECK(draws.maxCoeff() <= 1.0);
  const auto summary = posterior_summary(obs, g);
  const double sd = summary.sd[0];
  CHECK(std::fabs(draws.col(0).mean() - summary.mean[0]) <= 5.0 * sd / std::sqrt(20000.0));

  const FittedPrior pe{Family::point_exponential, make_parametric(0.0, 0.0, 2.0)};
  const auto left = posterior_sample(validate_observations({-45.0}, 1.0), pe, 20000, 4);
  const auto ls = posterior_summary(validate_observations({-45.0}, 1.0), pe);
  CHECK(left.minCoeff() >= 0.0);
  CHECK(std::fabs(left.col(0).mean() - ls.mean[0]) <= 5.0 * ls.sd[0] / std::sqrt(20000.0));
}

TEST_CASE("credible intervals") {
  const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(200, 2);
  for (const auto& iv : credible_intervals(zeros, 0.9)) {
    CHECK(iv.lower == 0.0);
    CHECK(iv.upper == 0.0);
  }

  const auto draws = posterior_sample(validate_observations({0.0}, 1.0), std_normal(), 40000, 5);
  const auto iv = credible_intervals(draws, 0.9)[0];
  CHECK(iv.lower == doctest::Approx(-1.163).epsilon(0.05));
  CHECK(iv.upper == doctest::Approx(1.163).epsilon(0.05));

  const FittedPrior atoms{Family::npmle, make_mixture(MixtureKind::point_mass, {PointMass{-1}, PointMass{1}}, {0.5, 0.5})};
  const auto two = posterior_sample(validate_observations({0.0}, 1.0), atoms, 10000, 6);
  const auto span = credible_intervals(two, 0.9)[0];
  CHECK(span.lower == -1.0);
  CHECK(span.upper == 1.0);

  CHECK_THROWS_AS(credible_intervals(zeros, 0.0), DataError);
  CHECK_THROWS_AS(credible_intervals(zeros, 1.0), DataError);
  CHECK_THROWS_AS(credible_intervals(Eigen::MatrixXd::Zero(99, 1), 0.9), DataError);

  // The streaming route reproduces the matrix route on stream 0.
  auto obs = validate_observations({-1.0, 0.5, 3.0}, 1.0);
  const FittedPrior pl{Family::point_laplace, make_parametric(0.0, 0.4, 1.0)};
  PosteriorSampler sampler(obs, pl, 9);
  const auto streamed = credible_intervals(sampler, 1000, 0.9);
  PosteriorSampler again(obs, pl, 9);
  const auto full = credible_intervals(again.draw(1000), 0.9);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(streamed[i].lower == full[i].lower);
    CHECK(streamed[i].upper == full[i].upper);
  }
}

TEST_CASE("property: lfsr bounds and symmetric priors at zero") {
  const std::vector<FittedPrior> priors{
      {Family::point_normal, make_parametric(0.0, 0.3, 2.0)},
      {Family::point_laplace, make_parametric(0.0, 0.7, 0.5)},
      {Family::normal, make_parametric(0.0, 0.0, 1.5)},
      {Family::normal_scale_mixture,
       make_mixture(MixtureKind::zero_mean_normal, {NormalComponent{0, 0}, NormalComponent{0, 3}}, {0.2, 0.8})},
      {Family::unimodal_symmetric,
       make_mixture(MixtureKind::uniform, {UniformComponent{0, 0}, UniformComponent{-2, 2}}, {0.5, 0.5})},
  };
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (const auto& g : priors) {
    const auto at0 = posterior_summary(validate_observations({0.0}, 1.3), g);
    CHECK(at0.lfsr[0] >= 0.5);
    std::vector<double> x(200);
    for (auto& v : x) v = 5.0 * z(rng);
    auto obs = validate_observations(x, 1.0);
    const auto ps = posterior_summary(obs, g);
    std::vector<double> neg = x;
    for (auto& v : neg) v = -v;
    const auto ns = posterior_summary(validate_observations(neg, 1.0), g);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(ps.lfsr[i] >= 0.0);
      CHECK(ps.lfsr[i] <= 1.0);
      CHECK(std::fabs(ps.mean[i] + ns.mean[i]) <= 1e-10);
    }
  }
}

// 2e5 draws per column keeps the strict tolerances meaningful across all
// 2000 simultaneous checks; at 2e4 the 0.01 lfsr band is under 3 binomial SEs.
TEST_CASE("property: sampler agrees with summaries for every family") {
  const auto truth = simulate_scenario(Scenario::tophat, 200, 17);
  auto obs = validate_observations(truth.x, truth.s);
  const std::size_t nsamp = 200000;
  std::vector<double> buf(nsamp);
  for (Family f : kAllFamilies) {
    const std::string name{cli_name(f)};
    CAPTURE(name);
    const auto res = solve(obs, spec_for(f), 23);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      res.sampler.draw_column(i, nsamp, 0, buf.data());
      const auto col = Eigen::Map<const Eigen::ArrayXd>(buf.data(), static_cast<Eigen::Index>(nsamp));
      const double m = col.mean();
      const double var = (col - m).square().sum() / (nsamp - 1);
      const double m4 = (col - m).pow(4).mean();
      const double sd_true = res.posterior.sd[i];
      const double se_mean = std::sqrt(var / nsamp);
      const double se_var = std::sqrt(std::max(0.0, m4 - var * var) / nsamp);
      CAPTURE(i);
      CHECK(std::fabs(m - res.posterior.mean[i]) <= 5.0 * se_mean + 1e-12);
      CHECK(std::fabs(var - sd_true * sd_true) <= 5.0 * se_var + 1e-12);
      const double le = (col <= 0.0).cast<double>().mean(), ge = (col >= 0.0).cast<double>().mean();
      CHECK(std::fabs(std::min(le, ge) - res.posterior.lfsr[i]) <= 0.01);
    }
  }
}
