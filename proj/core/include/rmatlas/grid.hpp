#pragma once

#include <array>
#include <cstddef>

#include "rmatlas/linalg.hpp"

namespace rmatlas {

using Index3 = std::array<int, 3>;

/// Regular lattice in 2 or 3 dimensions. Voxel (0,...,0) sits at `origin`;
/// linear indices run with x fastest.
class Grid {
 public:
  Grid() = default;

  /// Throws Error unless dim is 2 or 3, every shape entry is >= 3 and every spacing is > 0.
  Grid(int dim, Index3 shape, std::array<double, 3> spacing, std::array<double, 3> origin = {0, 0, 0});

  static Grid make2d(int nx, int ny, double hx = 1.0, double hy = 1.0, double ox = 0.0, double oy = 0.0);
  static Grid make3d(int nx, int ny, int nz, double h = 1.0);

  int dim() const noexcept { return dim_; }
  const Index3& shape() const noexcept { return shape_; }
  const std::array<double, 3>& spacing() const noexcept { return spacing_; }
  const std::array<double, 3>& origin() const noexcept { return origin_; }

  std::size_t size() const noexcept { return size_; }
  std::size_t stride(int axis) const noexcept { return stride_[axis]; }
  double cell_volume() const noexcept;

  std::size_t index(const Index3& ijk) const noexcept {
    return static_cast<std::size_t>(ijk[0]) + stride_[1] * ijk[1] + stride_[2] * ijk[2];
  }
  Index3 coords(std::size_t idx) const noexcept;
  Vec position(std::size_t idx) const;
  Vec position(const Index3& ijk) const;

  /// Continuous voxel coordinate of a physical point (not clamped).
  Vec to_voxel(const Vec& p) const;
  bool contains(const Index3& ijk) const noexcept;
  /// Nearest voxel to a physical point, or false when it rounds outside the lattice.
  bool nearest(const Vec& p, Index3& out) const;

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.dim_ == b.dim_ && a.shape_ == b.shape_ && a.spacing_ == b.spacing_ && a.origin_ == b.origin_;
  }

 private:
  int dim_ = 2;
  Index3 shape_{3, 3, 1};
  std::array<double, 3> spacing_{1, 1, 1};
  std::array<double, 3> origin_{0, 0, 0};
  std::array<std::size_t, 3> stride_{1, 3, 9};
  std::size_t size_ = 9;
};

/// Throws Error when the two grids differ.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

}  // namespace rmatlas
