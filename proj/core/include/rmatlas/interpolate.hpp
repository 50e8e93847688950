#pragma once

#include <array>
#include <cstddef>

#include "rmatlas/fields.hpp"

namespace rmatlas {

/// Multilinear interpolation weights of one query point. Points outside the
/// lattice are clamped to its boundary and flagged.
struct SampleWeights {
  std::array<std::size_t, 8> index{};
  std::array<double, 8> weight{};
  int count = 0;
  bool out_of_domain = false;
};

/// Weights of the derivative of the interpolant along one axis (physical
/// units). On an interior lattice plane the average of the two adjacent cell
/// slopes is used; along a clamped axis the derivative is zero.
struct DerivativeWeights {
  std::array<std::size_t, 16> index{};
  std::array<double, 16> weight{};
  int count = 0;
};

SampleWeights sample_weights(const Grid& grid, const Vec& p);
DerivativeWeights derivative_weights(const Grid& grid, const Vec& p, int axis);

/// Componentwise interpolation of any field. `out` must hold field.components() values.
void interpolate_into(const FieldBase& field, const SampleWeights& w, std::span<double> out);
void interpolate_into(const FieldBase& field, const DerivativeWeights& w, std::span<double> out);

double interpolate(const ScalarField& f, const Vec& p, bool* out_of_domain = nullptr);
Vec interpolate(const VectorField& f, const Vec& p, bool* out_of_domain = nullptr);
/// Componentwise (not projected); may leave the SPD cone only through rounding.
Mat interpolate(const MetricField& f, const Vec& p, bool* out_of_domain = nullptr);
/// Componentwise interpolation followed by spd_project.
Mat interpolate_spd(const MetricField& f, const Vec& p, bool* out_of_domain = nullptr);
/// Nearest-voxel lookup; false outside the lattice.
bool interpolate(const MaskField& m, const Vec& p, bool* out_of_domain = nullptr);

}  // namespace rmatlas
