#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ebnm/observations.hpp"
#include "ebnm/prior.hpp"

namespace ebnm {

struct PosteriorSummary {
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<double> second_moment;
  /// min{P(theta <= 0), P(theta >= 0)}; an atom at zero counts on both sides.
  std::vector<double> lfsr;
};

PosteriorSummary posterior_summary(const ObservationSet& obs, const FittedPrior& g);

/// sum_i log p(x_i | s_i, g).
double log_likelihood(const ObservationSet& obs, const FittedPrior& g);

/// Draws theta_i from p(theta_i | x_i, s_i, g). Component indicators are
/// drawn from the posterior responsibilities, then theta from the component
/// posterior; truncated normals are sampled by inverting the CDF on the log
/// scale so that draws stay exact far into a tail.
///
/// Draw k of a call uses a generator seeded from (seed, call index,
/// observation index), so columns are independent streams and two samplers
/// with the same seed produce identical sequences of matrices.
class PosteriorSampler {
 public:
  PosteriorSampler(const ObservationSet& obs, const FittedPrior& g, std::uint64_t seed = 1);

  /// nsamp x n matrix; column i holds draws for observation i.
  Eigen::MatrixXd draw(std::size_t nsamp);

  /// nsamp draws for observation i from an explicit stream.
  void draw_column(std::size_t i, std::size_t nsamp, std::uint64_t stream, double* out) const;

  std::size_t size() const noexcept { return pieces_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }

  struct Piece {
    enum class Kind { point, normal, truncated } kind;
    double cumulative;  // cumulative posterior probability up to this piece
    double center;      // point value or normal mean
    double sd;
    // Truncated normal, standardized and oriented so mass sits left:
    // theta = center + sd * (flip ? -z : z), z in [lo, hi].
    double lo, hi;
    double log_cdf_lo, log_mass;
    bool flip;
  };

 private:
  std::vector<std::vector<Piece>> pieces_;
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
};

Eigen::MatrixXd posterior_sample(const ObservationSet& obs, const FittedPrior& g, std::size_t nsamp,
                                 std::uint64_t seed);

struct Interval {
  double lower;
  double upper;
};

/// Per-column interval between the (1-level)/2 and (1+level)/2 empirical
/// quantiles (linear interpolation between order statistics). Throws
/// DataError when level is outside (0,1) or there are fewer than 100 draws.
std::vector<Interval> credible_intervals(const Eigen::MatrixXd& draws, double level);
Interval credible_interval(std::vector<double> column, double level);

/// Same intervals computed column by column from a sampler (stream 0)
/// without materializing the full draw matrix.
std::vector<Interval> credible_intervals(const PosteriorSampler& sampler, std::size_t nsamp, double level);

}  // namespace ebnm
