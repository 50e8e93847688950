#pragma once

#include <span>
#include <vector>

#include "rmatlas/fields.hpp"

namespace rmatlas {

/// Below this kappa the conformal (kappa = 0) branch of the minimal path is used.
inline constexpr double kKappaZero = 1e-12;

/// Closed-form Ebin minimal path between two SPD matrices at one point.
///
/// With S = log(g0^{-1/2} g1 g0^{-1/2}) and S0 its traceless part, the
/// quantities of the closed form are k = g0^{-1/2} S g0^{1/2}, k0 = its
/// traceless part, a = det(g0)^{1/4}, b = det(g1)^{1/4} and
/// kappa = sqrt(n tr(k0^2)) / 4. Everything is evaluated through the
/// symmetric matrix S so the path stays exactly symmetric.
class VoxelGeodesic {
 public:
  /// Throws Error if either matrix is not positive-definite.
  VoxelGeodesic(const Mat& g0, const Mat& g1);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double kappa() const noexcept { return kappa_; }
  /// min(pi, kappa)
  double theta() const noexcept;
  Mat k() const;
  Mat k0() const;

  /// Point g(t) on the minimal path, t in [0, 1]. For kappa >= pi the path
  /// degenerates to the zero matrix at t = a / (a + b).
  Mat at(double t) const;

  /// Squared distance density (16/n)(a^2 - 2ab cos(theta) + b^2).
  double sq_distance_density() const noexcept;

 private:
  int n_;
  Mat g0_, g1_, sqrt0_, isqrt0_, s0_;
  double trace_s_ = 0.0;
  double a_ = 0.0, b_ = 0.0, kappa_ = 0.0;
};

/// Per-voxel coefficients of the closed-form minimal path.
struct GeodesicCoefficients {
  Grid grid;
  std::vector<Mat> k;
  std::vector<Mat> k0;
  ScalarField a;
  ScalarField b;
  ScalarField kappa;
};

/// G_g(h, k) = sum over mask of tr(g^-1 h g^-1 k) sqrt(det g) * cell volume.
double ebin_inner_product(const MetricField& g, const MetricField& h, const MetricField& k, const MaskField& mask);

/// Unmasked voxels get the identity-pair coefficients (k = 0, a = b = 1).
GeodesicCoefficients compute_coefficients(const MetricField& g0, const MetricField& g1, const MaskField& mask);

/// Minimal path evaluated at t on masked voxels; unmasked voxels copy g0.
/// spd_flag is false when some masked voxel is degenerate at this t.
MetricField ebin_geodesic(const MetricField& g0, const MetricField& g1, double t, const MaskField& mask);

/// Per-voxel squared distance density (zero off the mask).
ScalarField ebin_sq_distance_density(const MetricField& g0, const MetricField& g1, const MaskField& mask);

double ebin_sq_distance(const MetricField& g0, const MetricField& g1, const MaskField& mask);
double ebin_distance(const MetricField& g0, const MetricField& g1, const MaskField& mask);

/// Geodesic marching: m_0 = metrics[0], m_i = path(m_{i-1}, metrics[i]) at t = 1/(i+1).
/// Unmasked voxels hold the identity. Throws Error on an empty list.
MetricField frechet_mean(std::span<const MetricField> metrics, const MaskField& mask);

}  // namespace rmatlas
