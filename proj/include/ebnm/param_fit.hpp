#pragma once

// Maximum marginal likelihood for the parametric spike-and-slab families.
// Parameters are optimized on an unconstrained scale: alpha = logit of the
// slab weight, beta = log of the slab scale (variance or rate), gamma = the
// mode itself.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ebnm/family_spec.hpp"
#include "ebnm/observations.hpp"
#include "ebnm/optimizer.hpp"
#include "ebnm/prior.hpp"

namespace ebnm {

enum class SlabKind { normal, laplace, exponential };

struct TransformedParams {
  double alpha = 0.0;  // logit(1 - pi0)
  double beta = 0.0;   // log scale
  double gamma = 0.0;  // mode
};

/// Which transformed parameters are free. Parameters that are not free take
/// the fixed values; alpha fixed at +inf means a pure slab.
struct ParamLayout {
  bool free_alpha = true;
  bool free_beta = true;
  bool free_gamma = false;
  TransformedParams fixed{};

  Eigen::Index dim() const noexcept { return free_alpha + free_beta + free_gamma; }
  Eigen::VectorXd pack(const TransformedParams& t) const;
  TransformedParams unpack(const Eigen::VectorXd& v) const;
};

/// Negative marginal log-likelihood of pi0 delta_mu + (1 - pi0) slab with
/// its analytic gradient in the packed transformed coordinates.
class SpikeSlabObjective {
 public:
  SpikeSlabObjective(const ObservationSet& obs, SlabKind slab, ParamLayout layout);

  double operator()(const Eigen::VectorXd& p, Eigen::VectorXd* grad) const;
  const ParamLayout& layout() const noexcept { return layout_; }

  /// (mu, pi0, scale) for a packed parameter vector, not canonicalized.
  ParametricPrior to_prior(const Eigen::VectorXd& p) const;

 private:
  const ObservationSet* obs_;
  SlabKind slab_;
  ParamLayout layout_;
};

struct ParametricFit {
  ParametricPrior prior;
  double log_likelihood = 0.0;
  int iterations = 0;
};

enum class NormalFitMethod { automatic, numeric };

/// Closed form when homoskedastic (unless numeric is forced), numeric
/// maximization otherwise. A zero variance fit is a point mass.
ParametricFit fit_normal(const ObservationSet& obs, Mode mode,
                         NormalFitMethod method = NormalFitMethod::automatic,
                         std::optional<double> fixed_variance = std::nullopt);

ParametricFit fit_point_normal(const ObservationSet& obs, Mode mode,
                               std::optional<double> fixed_scale = std::nullopt,
                               const std::optional<ParametricPrior>& init = std::nullopt);

ParametricFit fit_point_laplace(const ObservationSet& obs, Mode mode,
                                std::optional<double> fixed_scale = std::nullopt,
                                const std::optional<ParametricPrior>& init = std::nullopt);

/// Mode must be fixed; the slab lives on [mode, inf).
ParametricFit fit_point_exponential(const ObservationSet& obs, Mode mode = Mode::fixed(0.0),
                                    std::optional<double> fixed_scale = std::nullopt,
                                    const std::optional<ParametricPrior>& init = std::nullopt);

/// Mode location for which delta_mu has maximal likelihood (precision
/// weighted mean) when estimated, else the fixed value.
double point_mass_mode(const ObservationSet& obs, Mode mode);

/// Weighted median of x with weights 1/s^2.
double weighted_median(const ObservationSet& obs);

/// Marginal log-likelihood of a spike-and-slab record.
double spike_slab_log_likelihood(const ObservationSet& obs, SlabKind slab, const ParametricPrior& g);

}  // namespace ebnm
