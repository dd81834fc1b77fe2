#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ebnm {

/// Invalid user input: malformed observations, inconsistent family options.
class DataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An optimizer stopped without meeting its convergence criterion. The best
/// iterate found is attached so callers can inspect or reuse it.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, std::vector<double> best_iterate, double best_value,
           double residual = 0.0)
      : std::runtime_error(what),
        best_iterate_(std::move(best_iterate)),
        best_value_(best_value),
        residual_(residual) {}

  const std::vector<double>& best_iterate() const noexcept { return best_iterate_; }
  double best_value() const noexcept { return best_value_; }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<double> best_iterate_;
  double best_value_;
  double residual_;
};

}  // namespace ebnm
