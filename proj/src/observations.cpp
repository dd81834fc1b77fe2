#include "ebnm/observations.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ebnm/error.hpp"

namespace ebnm {

ObservationSet::ObservationSet(std::vector<double> x, std::vector<double> s)
    : x_(std::move(x)), s_(std::move(s)) {
  const auto [lo, hi] = std::minmax_element(s_.begin(), s_.end());
  homoskedastic_ = (*hi - *lo) <= 1e-12 * *hi;
}

double ObservationSet::min_s() const noexcept { return *std::min_element(s_.begin(), s_.end()); }

ObservationSet validate_observations(std::vector<double> x, std::vector<double> s) {
  if (x.empty()) throw DataError("no observations");
  if (s.size() == 1 && x.size() > 1) s.assign(x.size(), s.front());
  if (s.size() != x.size()) {
    throw DataError("length mismatch: " + std::to_string(x.size()) + " observations but " +
                    std::to_string(s.size()) + " standard errors");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw DataError("non-finite observation at index " + std::to_string(i));
    if (!std::isfinite(s[i])) throw DataError("non-finite standard error at index " + std::to_string(i));
    if (s[i] <= 0.0) throw DataError("nonpositive standard error at index " + std::to_string(i));
  }
  return ObservationSet(std::move(x), std::move(s));
}

ObservationSet validate_observations(std::vector<double> x, double s) {
  return validate_observations(std::move(x), std::vector<double>{s});
}

}  // namespace ebnm
