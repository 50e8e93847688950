#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rmatlas/grid.hpp"
#include "rmatlas/linalg.hpp"

namespace rmatlas {

/// Grid-aligned storage of `components()` doubles per voxel, interleaved per voxel.
class FieldBase {
 public:
  const Grid& grid() const noexcept { return grid_; }
  int components() const noexcept { return ncomp_; }
  std::size_t size() const noexcept { return grid_.size(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> voxel(std::size_t i) const noexcept {
    return {data_.data() + i * static_cast<std::size_t>(ncomp_), static_cast<std::size_t>(ncomp_)};
  }
  std::span<double> voxel(std::size_t i) noexcept {
    return {data_.data() + i * static_cast<std::size_t>(ncomp_), static_cast<std::size_t>(ncomp_)};
  }

 protected:
  FieldBase() = default;
  FieldBase(const Grid& grid, int ncomp, double fill = 0.0)
      : grid_(grid), ncomp_(ncomp), data_(grid.size() * static_cast<std::size_t>(ncomp), fill) {}

  Grid grid_;
  int ncomp_ = 0;
  std::vector<double> data_;
};

class ScalarField : public FieldBase {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double fill = 0.0) : FieldBase(grid, 1, fill) {}

  static ScalarField from_function(const Grid& grid, const std::function<double(const Vec&)>& fn);

  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
};

/// Per-voxel n-vector in physical coordinates.
class VectorField : public FieldBase {
 public:
  VectorField() = default;
  explicit VectorField(const Grid& grid) : FieldBase(grid, grid.dim(), 0.0) {}

  static VectorField from_function(const Grid& grid, const std::function<Vec(const Vec&)>& fn);

  Vec at(std::size_t i) const;
  void set(std::size_t i, const Vec& v);
};

/// Per-voxel symmetric n x n matrix stored as the packed upper triangle. Holds
/// metrics (SPD) as well as tangent vectors (symmetric, possibly indefinite).
class MetricField : public FieldBase {
 public:
  MetricField() = default;
  /// Zero-initialized field; spd_flag starts false.
  explicit MetricField(const Grid& grid) : FieldBase(grid, packed_size(grid.dim()), 0.0) {}

  static MetricField identity(const Grid& grid);
  static MetricField constant(const Grid& grid, const Mat& m);
  static MetricField from_function(const Grid& grid, const std::function<Mat(const Vec&)>& fn);

  Mat at(std::size_t i) const;
  void set(std::size_t i, const Mat& m);

  /// True when every voxel of the mask the producer validated against is positive-definite.
  bool spd_flag() const noexcept { return spd_; }
  void set_spd_flag(bool v) noexcept { spd_ = v; }

 private:
  bool spd_ = false;
};

class MaskField {
 public:
  MaskField() = default;
  explicit MaskField(const Grid& grid, bool fill = false) : grid_(grid), data_(grid.size(), fill ? 1 : 0) {}

  static MaskField full(const Grid& grid) { return MaskField(grid, true); }
  static MaskField from_function(const Grid& grid, const std::function<bool(const Vec&)>& fn);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool operator[](std::size_t i) const noexcept { return data_[i] != 0; }
  void set(std::size_t i, bool v) noexcept { data_[i] = v ? 1 : 0; }
  bool at(const Index3& ijk) const noexcept { return grid_.contains(ijk) && data_[grid_.index(ijk)] != 0; }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::size_t count() const noexcept;
  /// Face-connected components of the true voxels.
  int component_count() const;
  /// Per-voxel component label (-1 outside the mask), labels 0..component_count()-1.
  std::vector<int> component_labels() const;
  /// Drops, until none remain, voxels with no set neighbour along some axis
  /// (where derivative stencils cannot be formed).
  MaskField pruned() const;
  /// Throws Error unless some voxel away from the grid boundary is set.
  void validate() const;

  friend bool operator==(const MaskField& a, const MaskField& b) noexcept {
    return a.grid_ == b.grid_ && a.data_ == b.data_;
  }

 private:
  Grid grid_;
  std::vector<std::uint8_t> data_;
};

/// Christoffel symbols of the second kind, Gamma^k_{ij}, stored per voxel as
/// n blocks (one per k) of the packed symmetric (i, j) index.
class ChristoffelField : public FieldBase {
 public:
  ChristoffelField() = default;
  explicit ChristoffelField(const Grid& grid) : FieldBase(grid, grid.dim() * packed_size(grid.dim()), 0.0) {}

  double operator()(std::size_t voxel, int k, int i, int j) const noexcept {
    const int n = grid_.dim();
    return data_[voxel * ncomp_ + k * packed_size(n) + packed_index(n, i, j)];
  }
  double& operator()(std::size_t voxel, int k, int i, int j) noexcept {
    const int n = grid_.dim();
    return data_[voxel * ncomp_ + k * packed_size(n) + packed_index(n, i, j)];
  }
};

/// Packed symmetric components <-> matrix.
Mat unpack_symmetric(std::span<const double> packed, int n);
void pack_symmetric(const Mat& m, std::span<double> packed);

}  // namespace rmatlas
