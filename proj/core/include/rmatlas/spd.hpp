#pragma once

#include "rmatlas/fields.hpp"
#include "rmatlas/linalg.hpp"

namespace rmatlas {

enum class MatrixFunction { Log, Exp, Sqrt, Inverse, InverseSqrt };

/// Matrix function of a single symmetric matrix via its eigendecomposition.
/// Log, Sqrt, Inverse and InverseSqrt throw Error when an eigenvalue is below kEpsPD.
Mat matrix_function(const Mat& a, MatrixFunction fn);

/// Applies `fn` voxel by voxel. Throws NotPositiveDefinite naming the first offending voxel.
MetricField pointwise_matrix_map(const MetricField& field, MatrixFunction fn);

/// sqrt(det g) per voxel. Throws NotPositiveDefinite on a non-PD voxel.
ScalarField volume_density(const MetricField& g);

/// Clamps eigenvalues from below at eps_pd. Matrices whose smallest eigenvalue
/// is already >= eps_pd are returned bit-for-bit unchanged.
Mat spd_project(const Mat& a, double eps_pd = kEpsPD);
MetricField spd_project(const MetricField& field, double eps_pd = kEpsPD);

bool is_spd(const Mat& a, double eps_pd = kEpsPD);

/// True when every voxel of `mask` holds a matrix with all eigenvalues >= eps_pd.
bool all_spd(const MetricField& field, const MaskField& mask, double eps_pd = kEpsPD);

/// Throws NotPositiveDefinite unless all_spd holds.
void require_spd(const MetricField& field, const MaskField& mask, const char* what);

}  // namespace rmatlas
