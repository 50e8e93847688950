#pragma once

#include <optional>
#include <vector>

#include "rmatlas/diffeomorphism.hpp"
#include "rmatlas/fields.hpp"
#include "rmatlas/poisson.hpp"

namespace rmatlas {

/// Fixed: epsilon is the largest displacement of each increment, in voxels.
/// EnergyAdaptive: epsilon = E / <grad E, v>, the step that would zero the
/// linearized energy (backed off by halving).
enum class EpsilonPolicy { Fixed, EnergyAdaptive };

struct RegistrationConfig {
  double lambda = 100.0;
  double epsilon = 5.0;
  int max_iter = 400;
  EpsilonPolicy epsilon_policy = EpsilonPolicy::EnergyAdaptive;
  int max_halvings = 10;
  double solver_tolerance = 1e-8;

  /// Throws Error on non-positive values.
  void validate() const;
};

struct EnergyTerms {
  double deformation = 0.0;  // dist^2_Diff(id, phi)
  double matching = 0.0;     // dist^2_Met(g0, phi^* g1), unweighted
  double total = 0.0;        // deformation + lambda * matching
};

struct EnergyReport {
  std::vector<double> total;
  std::vector<double> deformation;
  std::vector<double> matching;
  std::vector<bool> accepted;
  std::vector<double> epsilon;
  EnergyTerms initial;

  std::size_t size() const noexcept { return total.size(); }
};

/// dist_Met(I, phi^* I): the deformation cost of phi.
double dist_diff(const Diffeomorphism& phi, const MaskField& mask);

/// E(phi) = dist^2_Diff(id, phi) + lambda dist^2_Met(g0, phi^* g1).
EnergyTerms matching_energy(const Diffeomorphism& phi, const MetricField& g0, const MetricField& g1, double lambda,
                            const MaskField& mask);

/// Gradient of the discrete energy with respect to the displacement values
/// (Euclidean pairing over all voxel components).
VectorField energy_gradient(const Diffeomorphism& phi, const MetricField& g0, const MetricField& g1, double lambda,
                            const MaskField& mask);

/// v with Delta v = -grad and v = 0 on the grid boundary (componentwise CG).
VectorField information_metric_smooth(const VectorField& grad, const CgSettings& settings = {});

/// Energy and gradient evaluation with the per-voxel g0 quantities cached.
class MatchingProblem {
 public:
  MatchingProblem(const MetricField& g0, const MetricField& g1, double lambda, const MaskField& mask);

  /// Throws NotPositiveDefinite when det(d phi) <= 0 on the mask.
  EnergyTerms energy(const Diffeomorphism& phi) const;
  VectorField gradient(const Diffeomorphism& phi) const;

  const MaskField& mask() const noexcept { return mask_; }
  double lambda() const noexcept { return lambda_; }

 private:
  const MetricField& g0_;
  const MetricField& g1_;
  double lambda_;
  MaskField mask_;
  std::vector<Mat> g0_isqrt_;
  std::vector<double> g0_a_;
};

struct RegistrationResult {
  Diffeomorphism phi;
  EnergyReport report;
};

/// Algorithm 1: phi <- (id - eps v) o phi with v the Sobolev-smoothed gradient
/// of E with respect to the increment. Steps that would fold the map or raise
/// the energy are halved up to max_halvings times; otherwise the iteration is
/// flagged as rejected and the loop stops (the state would not change).
RegistrationResult register_metrics(const MetricField& g0, const MetricField& g1, const RegistrationConfig& config,
                                    const MaskField& mask, const std::optional<Diffeomorphism>& initial = std::nullopt);

}  // namespace rmatlas
