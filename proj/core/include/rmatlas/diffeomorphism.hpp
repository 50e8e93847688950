#pragma once

#include <vector>

#include "rmatlas/fields.hpp"

namespace rmatlas {

/// Map phi(x) = x + u(x) sampled on the voxels of a grid.
class Diffeomorphism {
 public:
  Diffeomorphism() = default;
  /// Identity map.
  explicit Diffeomorphism(const Grid& grid);
  explicit Diffeomorphism(VectorField displacement);

  const Grid& grid() const noexcept { return u_.grid(); }
  const VectorField& displacement() const noexcept { return u_; }
  bool is_identity() const noexcept;

  /// phi at a voxel centre.
  Vec apply(std::size_t voxel) const;
  /// phi at an arbitrary point (displacement interpolated, clamped outside the lattice).
  Vec apply_point(const Vec& p) const;
  /// d phi at a voxel: J_ij = delta_ij + d u_i / d x_j, central differences
  /// inside the lattice and one-sided on its boundary.
  Mat jacobian(std::size_t voxel) const;
  /// Smallest det(d phi) over the mask.
  double min_jacobian_determinant(const MaskField& mask) const;

 private:
  VectorField u_;
};

/// (psi o phi)(x) = psi(phi(x)).
Diffeomorphism compose(const Diffeomorphism& psi, const Diffeomorphism& phi);

/// (phi^* g)(x) = d phi(x)^T g(phi(x)) d phi(x) on every voxel, g sampled by
/// multilinear interpolation. Throws NotPositiveDefinite when det(d phi) <= 0
/// on the mask. When `project` is set the result is clamped into the SPD cone.
MetricField pullback_metric(const Diffeomorphism& phi, const MetricField& g, const MaskField& mask,
                            bool project = true);
MetricField pullback_metric(const Diffeomorphism& phi, const MetricField& g);

/// M'(x) = M(nearest voxel to phi(x)); false where phi(x) leaves the lattice.
MaskField warp_mask(const MaskField& mask, const Diffeomorphism& phi);

}  // namespace rmatlas
