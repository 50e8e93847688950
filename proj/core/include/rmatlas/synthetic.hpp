#pragma once

#include <array>
#include <utility>
#include <vector>

#include "rmatlas/conformal.hpp"
#include "rmatlas/fields.hpp"

namespace rmatlas {

/// How the anisotropy ratio rho maps to eigenvalues of D.
enum class AnisotropyReading {
  AxisLength,  // eigenvalue ratio rho^2
  Eigenvalue,  // eigenvalue ratio rho
};

/// Family of curves parallel to y = c3 x^3 + c2 x^2 + c1 x + c0.
struct CubicFamilySpec {
  std::array<double, 4> coeffs{1.0, 0.0, 0.0, 0.0};  // c3, c2, c1, c0
  double max_offset = 0.2;
  Grid grid;
  double rho = 6.0;
  AnisotropyReading reading = AnisotropyReading::AxisLength;

  double y(double x) const noexcept;
  double slope(double x) const noexcept;
  double curvature_term(double x) const noexcept;  // second derivative
  /// Throws Error on rho < 1 or a non-positive offset.
  void validate() const;
};

/// Point of the central curve closest to p (x coordinate of the foot point).
double central_foot_point(const CubicFamilySpec& spec, double px, double py);
/// Signed distance from the central curve (positive on the side of the unit normal (-y', 1)).
double signed_offset(const CubicFamilySpec& spec, double px, double py);
/// Point at parameter x on the parallel curve with offset k.
std::array<double, 2> parallel_curve_point(const CubicFamilySpec& spec, double x, double k);

/// Unit tangent of the parallel curve through each voxel (in the xy plane for
/// 3D grids, extruded along z) and the band |offset| <= max_offset.
std::pair<VectorField, MaskField> cubic_vector_field(const CubicFamilySpec& spec);

/// D = V V^T + s (I - V V^T) on the mask (s = 1/rho^2 or 1/rho), identity elsewhere.
TensorImage tensors_from_field(const VectorField& v, double rho, const MaskField& mask,
                               AnisotropyReading reading = AnisotropyReading::AxisLength);

/// cubic_vector_field followed by tensors_from_field.
TensorImage synthesize_subject(const CubicFamilySpec& spec);

/// Default 64 x 64 grid covering [-1, 1]^2.
Grid default_synthetic_grid(int nodes = 64);

/// The four subject curves used for atlas experiments.
std::vector<CubicFamilySpec> default_subject_family(const Grid& grid, double rho = 6.0,
                                                    AnisotropyReading reading = AnisotropyReading::AxisLength);

}  // namespace rmatlas
