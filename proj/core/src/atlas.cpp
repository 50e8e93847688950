#include "rmatlas/atlas.hpp"

#include <algorithm>

#include "rmatlas/ebin.hpp"
#include "rmatlas/error.hpp"
#include "rmatlas/spd.hpp"

namespace rmatlas {

namespace {

struct SubjectState {
  const ConnectomeMetric* subject;
  Diffeomorphism phi;
  double objective = 0.0;
};

double subject_objective(const MetricField& mean, const SubjectState& s, double lambda, const MaskField& mask) {
  return MatchingProblem(mean, s.subject->g_alpha, lambda, mask).energy(s.phi).total;
}

std::vector<MetricField> pulled_back(const std::vector<SubjectState>& states, const MaskField& mask) {
  std::vector<MetricField> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(pullback_metric(s.phi, s.subject->g_alpha, mask));
  return out;
}

}  // namespace

void AtlasConfig::validate() const {
  if (outer_iterations < 0) throw Error("atlas: outer_iterations must be >= 0");
  if (inner_matching_iterations < 0) throw Error("atlas: inner_matching_iterations must be >= 0");
  registration.validate();
}

MaskField union_of_warped_masks(const std::vector<MaskField>& masks, const std::vector<Diffeomorphism>& phis) {
  if (masks.empty() || masks.size() != phis.size()) throw Error("union_of_warped_masks: bad input sizes");
  MaskField out(masks.front().grid());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const MaskField w = warp_mask(masks[i], phis[i]);
    for (std::size_t v = 0; v < out.size(); ++v)
      if (w[v]) out.set(v, true);
  }
  return out;
}

AtlasResult atlas_build(const std::vector<ConnectomeMetric>& subjects, const AtlasConfig& config) {
  config.validate();
  if (subjects.size() < 2) throw Error("atlas_build: need at least two subjects");
  const Grid& grid = subjects.front().g_alpha.grid();
  std::vector<MaskField> masks;
  std::vector<SubjectState> states;
  for (const auto& s : subjects) {
    require_same_grid(grid, s.g_alpha.grid(), "atlas_build");
    require_same_grid(grid, s.mask.grid(), "atlas_build");
    masks.push_back(s.mask);
    states.push_back({&s, Diffeomorphism(grid), 0.0});
  }
  const double lambda = config.registration.lambda;
  RegistrationConfig inner = config.registration;
  inner.max_iter = config.inner_matching_iterations;

  auto current_phis = [&] {
    std::vector<Diffeomorphism> p;
    for (const auto& s : states) p.push_back(s.phi);
    return p;
  };

  AtlasResult result;
  result.union_mask = union_of_warped_masks(masks, current_phis());
  {
    const std::vector<MetricField> metrics = pulled_back(states, result.union_mask);
    result.atlas = frechet_mean(metrics, result.union_mask);
  }
  for (auto& s : states) s.objective = subject_objective(result.atlas, s, lambda, result.union_mask);

  auto total = [&] {
    double t = 0.0;
    for (const auto& s : states) t += s.objective;
    return t;
  };

  auto try_subject_step = [&](std::size_t i, const RegistrationConfig& cfg) {
    RegistrationResult r;
    try {
      r = register_metrics(result.atlas, states[i].subject->g_alpha, cfg, result.union_mask, states[i].phi);
    } catch (const Error&) {
      return false;
    }
    if (r.report.size() == 0 || !r.report.accepted.front()) return false;
    std::vector<Diffeomorphism> phis = current_phis();
    phis[i] = r.phi;
    MaskField mask = union_of_warped_masks(masks, phis);
    const bool same_mask = mask == result.union_mask;
    std::vector<double> objectives(states.size());
    double sum = 0.0;
    try {
      for (std::size_t k = 0; k < states.size(); ++k) {
        if (k != i && same_mask) {
          objectives[k] = states[k].objective;
        } else {
          const SubjectState probe{states[k].subject, phis[k], 0.0};
          objectives[k] = subject_objective(result.atlas, probe, lambda, mask);
        }
        sum += objectives[k];
      }
    } catch (const Error&) {
      return false;
    }
    if (sum > total()) return false;
    states[i].phi = std::move(r.phi);
    for (std::size_t k = 0; k < states.size(); ++k) states[k].objective = objectives[k];
    result.union_mask = std::move(mask);
    return true;
  };

  for (int it = 0; it < config.outer_iterations; ++it) {
    if (it > 0) {
      // Mean step, kept only if it lowers the objective.
      const std::vector<MetricField> metrics = pulled_back(states, result.union_mask);
      MetricField candidate = frechet_mean(metrics, result.union_mask);
      std::vector<double> objectives;
      double sum = 0.0;
      for (const auto& s : states) {
        objectives.push_back(subject_objective(candidate, s, lambda, result.union_mask));
        sum += objectives.back();
      }
      if (sum <= total()) {
        result.atlas = std::move(candidate);
        for (std::size_t i = 0; i < states.size(); ++i) states[i].objective = objectives[i];
      }
    }

    std::vector<bool> skipped(states.size(), true);
    if (config.inner_matching_iterations > 0) {
      for (std::size_t i = 0; i < states.size(); ++i) skipped[i] = !try_subject_step(i, inner);
    }
    result.trace.push_back(total());
    const bool stalled = std::find(skipped.begin(), skipped.end(), false) == skipped.end();
    result.skipped.push_back(std::move(skipped));
    if (stalled) {
      // Nothing moved: every later iteration would repeat this one exactly.
      while (static_cast<int>(result.trace.size()) < config.outer_iterations) {
        result.trace.push_back(result.trace.back());
        result.skipped.push_back(result.skipped.back());
      }
      break;
    }
  }
  result.phis = current_phis();
  return result;
}

ConnectomeMetric finalize_atlas_alpha(const MetricField& atlas, const MaskField& mask, const AlphaSolveSettings& settings,
                                      AlphaReport* report) {
  require_spd(atlas, mask, "finalize_atlas_alpha");
  TensorImage d{MetricField::identity(atlas.grid()), mask.pruned()};
  for (std::size_t v = 0; v < atlas.size(); ++v)
    if (d.mask[v]) d.tensors.set(v, matrix_function(atlas.at(v), MatrixFunction::Inverse));
  d.tensors.set_spd_flag(true);
  return build_connectome_metric(d, settings, report);
}

}  // namespace rmatlas
