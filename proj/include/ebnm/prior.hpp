#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ebnm {

enum class Family {
  normal,
  point_normal,
  point_laplace,
  point_exponential,
  normal_scale_mixture,
  unimodal_symmetric,
  unimodal,
  unimodal_nonnegative,
  unimodal_nonpositive,
  npmle,
};

inline constexpr Family kAllFamilies[] = {
    Family::normal,          Family::point_normal,         Family::point_laplace,
    Family::point_exponential, Family::normal_scale_mixture, Family::unimodal_symmetric,
    Family::unimodal,        Family::unimodal_nonnegative, Family::unimodal_nonpositive,
    Family::npmle,
};

/// Canonical snake_case name, as written to fitted_prior.json.
std::string_view to_string(Family f);
/// Short command-line name (point-normal, smn, symm-u, ...).
std::string_view cli_name(Family f);
/// Accepts either the canonical or the command-line name.
std::optional<Family> parse_family(std::string_view name);

bool is_parametric(Family f);

// Prior components. Each one is a distribution for theta; the kernels
// convolve them with N(0, s^2) noise.

struct PointMass {
  double location = 0.0;
  bool operator==(const PointMass&) const = default;
};

struct NormalComponent {
  double mean = 0.0;
  double variance = 0.0;
  bool operator==(const NormalComponent&) const = default;
};

/// Unif[lower, upper]; lower == upper is a point mass.
struct UniformComponent {
  double lower = 0.0;
  double upper = 0.0;
  bool operator==(const UniformComponent&) const = default;
};

/// Laplace(mean, rate): density (rate/2) exp(-rate |theta - mean|).
struct LaplaceSlab {
  double mean = 0.0;
  double rate = 1.0;
  bool operator==(const LaplaceSlab&) const = default;
};

/// Exponential on [origin, inf) with the given rate.
struct ExponentialSlab {
  double origin = 0.0;
  double rate = 1.0;
  bool operator==(const ExponentialSlab&) const = default;
};

using Component =
    std::variant<PointMass, NormalComponent, UniformComponent, LaplaceSlab, ExponentialSlab>;

struct WeightedComponent {
  double weight;
  Component component;
};

/// Spike-and-slab record shared by the parametric families:
///   pi0 * delta_mu + (1 - pi0) * slab(mu, scale)
/// where scale is the slab variance for normal slabs and the rate for
/// Laplace/exponential slabs. The normal family stores pi0 = 0. A point mass
/// is stored canonically as pi0 = 1, scale = 0.
struct ParametricPrior {
  double mu = 0.0;
  double pi0 = 0.0;
  double scale = 0.0;
  bool operator==(const ParametricPrior&) const = default;

  bool is_point_mass() const noexcept { return pi0 == 1.0 && scale == 0.0; }
};

enum class MixtureKind { point_mass, zero_mean_normal, uniform };

std::string_view to_string(MixtureKind k);
std::optional<MixtureKind> parse_mixture_kind(std::string_view name);

/// Finite mixture over components of a single kind. Components are kept
/// sorted ascending (location for point masses, variance for normals,
/// (width, lower) for uniforms) with weights permuted alongside.
struct MixturePrior {
  MixtureKind kind = MixtureKind::point_mass;
  std::vector<Component> components;
  std::vector<double> weights;
  bool operator==(const MixturePrior&) const = default;

  std::size_t size() const noexcept { return components.size(); }
};

/// Checks kinds, weight simplex (1e-12) and interval ordering, then sorts.
/// Throws DataError when an invariant fails.
MixturePrior make_mixture(MixtureKind kind, std::vector<Component> components,
                          std::vector<double> weights);

/// Builds a parametric record and applies point-mass canonicalization.
/// Throws DataError when pi0 is outside [0,1] or scale < 0.
ParametricPrior make_parametric(double mu, double pi0, double scale);

/// The estimated prior g-hat together with the family it was fit under.
struct FittedPrior {
  Family family = Family::normal;
  std::variant<ParametricPrior, MixturePrior> prior;
  bool operator==(const FittedPrior&) const = default;

  bool is_parametric() const noexcept { return std::holds_alternative<ParametricPrior>(prior); }
  const ParametricPrior& parametric() const { return std::get<ParametricPrior>(prior); }
  const MixturePrior& mixture() const { return std::get<MixturePrior>(prior); }
};

/// Expands any fitted prior to weighted components; zero-weight components
/// are dropped.
std::vector<WeightedComponent> expand(const FittedPrior& g);

/// JSON text with field order family, type, parametric|mixture.
std::string to_json(const FittedPrior& g, int indent = 2);
/// Throws DataError on schema violations.
FittedPrior fitted_prior_from_json(std::string_view text);

}  // namespace ebnm
