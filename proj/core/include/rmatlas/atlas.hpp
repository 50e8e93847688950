#pragma once

#include <vector>

#include "rmatlas/conformal.hpp"
#include "rmatlas/diffeomorphism.hpp"
#include "rmatlas/registration.hpp"

namespace rmatlas {

struct AtlasConfig {
  int outer_iterations = 400;
  int inner_matching_iterations = 2;
  RegistrationConfig registration{100.0, 5.0, 2, EpsilonPolicy::Fixed};

  void validate() const;
};

struct AtlasResult {
  MetricField atlas;
  /// Accumulated map per subject: the subject in atlas space is phis[i]^* g_i.
  std::vector<Diffeomorphism> phis;
  /// Objective sum_i dist^2_Diff(id, phi_i) + lambda dist^2_Met(atlas, phi_i^* g_i) after each outer iteration.
  std::vector<double> trace;
  MaskField union_mask;
  /// skipped[k][i]: subject i made no progress in outer iteration k.
  std::vector<std::vector<bool>> skipped;
};

/// Union of the subject masks warped by their maps.
MaskField union_of_warped_masks(const std::vector<MaskField>& masks, const std::vector<Diffeomorphism>& phis);

/// Alternates a Frechet-mean step over the union mask with a few registration
/// steps per subject (mean -> subject). A step is kept only when it does not
/// raise the objective, so the trace is non-increasing.
AtlasResult atlas_build(const std::vector<ConnectomeMetric>& subjects, const AtlasConfig& config);

/// Recomputes the principal directions of the atlas tensors (inverse of the
/// atlas metric) and solves for a new conformal factor on mask.pruned().
ConnectomeMetric finalize_atlas_alpha(const MetricField& atlas, const MaskField& mask,
                                      const AlphaSolveSettings& settings = {}, AlphaReport* report = nullptr);

}  // namespace rmatlas
