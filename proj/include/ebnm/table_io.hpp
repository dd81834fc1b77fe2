#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "ebnm/observations.hpp"
#include "ebnm/posterior.hpp"

namespace ebnm {

/// Reads a CSV or TSV file with a header row naming column x and optionally
/// column s. Without an s column, `s_scalar` must be given. Throws DataError
/// on malformed input.
ObservationSet read_observations(const std::filesystem::path& path, std::optional<double> s_scalar);
ObservationSet parse_observations(const std::string& text, std::optional<double> s_scalar);

/// Columns index,x,s,mean,sd,lfsr; numbers with 17 significant digits.
std::string posterior_csv(const ObservationSet& obs, const PosteriorSummary& post);

/// nsamp rows, one column per observation (header theta_1..theta_n).
std::string samples_csv(const Eigen::MatrixXd& draws);

std::string format_double(double v);

}  // namespace ebnm
