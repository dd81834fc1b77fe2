#pragma once

// Single entry point: fit a prior from a family, then summarize posteriors.

#include <cstdint>
#include <optional>

#include "ebnm/error.hpp"
#include "ebnm/family_spec.hpp"
#include "ebnm/mix_fit.hpp"
#include "ebnm/observations.hpp"
#include "ebnm/param_fit.hpp"
#include "ebnm/posterior.hpp"
#include "ebnm/prior.hpp"

namespace ebnm {

struct PriorFit {
  FittedPrior prior;
  double log_likelihood = 0.0;
  std::optional<KktCertificate> kkt;  // set for nonparametric fits
};

/// Estimates g under spec (or returns g_init unchanged when fix_g is set).
PriorFit fit_prior(const ObservationSet& obs, const PriorFamilySpec& spec);

struct EbnmResult {
  FittedPrior fitted_prior;
  double log_likelihood = 0.0;
  PosteriorSummary posterior;
  PosteriorSampler sampler;
  std::optional<KktCertificate> kkt;
};

EbnmResult solve(const ObservationSet& obs, const PriorFamilySpec& spec, std::uint64_t sampler_seed = 1);

}  // namespace ebnm
