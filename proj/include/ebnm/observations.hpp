#pragma once

#include <cstddef>
#include <vector>

namespace ebnm {

/// Observations x_i ~ N(theta_i, s_i^2). Construct through
/// validate_observations(); a constructed set always has matching lengths,
/// finite x and finite positive s.
class ObservationSet {
 public:
  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& s() const noexcept { return s_; }
  std::size_t size() const noexcept { return x_.size(); }

  /// True when all s_i agree to 1e-12 relative.
  bool homoskedastic() const noexcept { return homoskedastic_; }

  double min_s() const noexcept;

 private:
  ObservationSet(std::vector<double> x, std::vector<double> s);

  friend ObservationSet validate_observations(std::vector<double> x, std::vector<double> s);

  std::vector<double> x_;
  std::vector<double> s_;
  bool homoskedastic_ = false;
};

/// Throws DataError on length mismatch, non-finite x, or s <= 0 / non-finite.
/// A length-one s is broadcast to every observation.
ObservationSet validate_observations(std::vector<double> x, std::vector<double> s);
ObservationSet validate_observations(std::vector<double> x, double s);

}  // namespace ebnm
