#pragma once

#include "rmatlas/fields.hpp"
#include "rmatlas/poisson.hpp"

namespace rmatlas {

/// Diffusion tensors D(x) with the region they are valid on.
struct TensorImage {
  MetricField tensors;
  MaskField mask;

  const Grid& grid() const noexcept { return tensors.grid(); }
};

/// g_alpha = exp(alpha) * g_tilde with g_tilde = D^{-1}.
struct ConnectomeMetric {
  MetricField g_tilde;
  ScalarField alpha;
  MetricField g_alpha;
  MaskField mask;
};

/// Unit principal eigenvectors plus the voxels where they are well defined.
struct PrincipalDirections {
  VectorField vectors;
  MaskField reliable;
};

struct AlphaSolveSettings {
  double tolerance = 1e-8;
  int max_iterations = 0;  // 0 selects 100 * sqrt(masked voxels)
};

struct AlphaReport {
  int iterations = 0;
  double relative_residual = 0.0;
  double functional_before = 0.0;  // F(0)
  double functional_after = 0.0;   // F(alpha)
};

/// Per-voxel inverse on the mask, identity elsewhere.
MetricField inverse_tensor_metric(const TensorImage& d);

/// Eigenvectors of the largest eigenvalue, sign-aligned by a flood fill over
/// each mask component. Voxels whose top two eigenvalues agree to 1e-9
/// (relative) are marked unreliable.
PrincipalDirections principal_eigenvector_field(const TensorImage& d);

/// F(alpha) = sum_mask |grad alpha - 2 nabla_V V|_g^2 sqrt(det g) * cell volume,
/// with the target set to zero on voxels outside `reliable`.
double conformal_functional(const ScalarField& alpha, const VectorField& v, const MetricField& g, const MaskField& mask,
                            const MaskField* reliable = nullptr);

/// Least-squares minimizer of conformal_functional: the discrete
/// Laplace-Beltrami equation Delta alpha = 2 div(nabla_V V) with its natural
/// Neumann condition. Gauge: alpha has zero mean on every mask component.
ScalarField solve_alpha(const VectorField& v, const MetricField& g, const MaskField& mask,
                        const MaskField* reliable = nullptr, const AlphaSolveSettings& settings = {},
                        AlphaReport* report = nullptr);

/// Convenience overload: g = D^{-1}, V = principal eigenvectors of D.
ScalarField solve_alpha(const TensorImage& d, const AlphaSolveSettings& settings = {}, AlphaReport* report = nullptr);

/// The matrix L = D^T W D of the normal equations (unknowns: masked voxels in
/// index order). Exposed for symmetry checks.
SparseMatrix conformal_normal_matrix(const MetricField& g, const MaskField& mask);

ConnectomeMetric build_connectome_metric(const TensorImage& d, const AlphaSolveSettings& settings = {},
                                         AlphaReport* report = nullptr);

}  // namespace rmatlas
