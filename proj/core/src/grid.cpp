#include "rmatlas/grid.hpp"

#include <cmath>
#include <string>

#include "rmatlas/error.hpp"

namespace rmatlas {

Grid::Grid(int dim, Index3 shape, std::array<double, 3> spacing, std::array<double, 3> origin)
    : dim_(dim), shape_(shape), spacing_(spacing), origin_(origin) {
  if (dim != 2 && dim != 3) throw Error("grid dimension must be 2 or 3, got " + std::to_string(dim));
  for (int a = 0; a < dim; ++a) {
    if (shape_[a] < 3) throw Error("grid shape must be >= 3 along every axis");
    if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a])) throw Error("grid spacing must be positive");
  }
  for (int a = dim; a < 3; ++a) {
    shape_[a] = 1;
    spacing_[a] = 1.0;
    origin_[a] = 0.0;
  }
  stride_ = {1, static_cast<std::size_t>(shape_[0]), static_cast<std::size_t>(shape_[0]) * shape_[1]};
  size_ = stride_[2] * static_cast<std::size_t>(shape_[2]);
}

Grid Grid::make2d(int nx, int ny, double hx, double hy, double ox, double oy) {
  return Grid(2, {nx, ny, 1}, {hx, hy, 1.0}, {ox, oy, 0.0});
}

Grid Grid::make3d(int nx, int ny, int nz, double h) { return Grid(3, {nx, ny, nz}, {h, h, h}); }

double Grid::cell_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing_[a];
  return v;
}

Index3 Grid::coords(std::size_t idx) const noexcept {
  Index3 c{0, 0, 0};
  c[2] = static_cast<int>(idx / stride_[2]);
  idx -= static_cast<std::size_t>(c[2]) * stride_[2];
  c[1] = static_cast<int>(idx / stride_[1]);
  c[0] = static_cast<int>(idx - static_cast<std::size_t>(c[1]) * stride_[1]);
  return c;
}

Vec Grid::position(const Index3& ijk) const {
  Vec p(dim_);
  for (int a = 0; a < dim_; ++a) p[a] = origin_[a] + spacing_[a] * ijk[a];
  return p;
}

Vec Grid::position(std::size_t idx) const { return position(coords(idx)); }

Vec Grid::to_voxel(const Vec& p) const {
  Vec v(dim_);
  for (int a = 0; a < dim_; ++a) v[a] = (p[a] - origin_[a]) / spacing_[a];
  return v;
}

bool Grid::contains(const Index3& ijk) const noexcept {
  for (int a = 0; a < dim_; ++a)
    if (ijk[a] < 0 || ijk[a] >= shape_[a]) return false;
  return true;
}

bool Grid::nearest(const Vec& p, Index3& out) const {
  out = {0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    const double v = (p[a] - origin_[a]) / spacing_[a];
    if (!std::isfinite(v)) return false;
    const double r = std::floor(v + 0.5);
    if (r < 0 || r >= shape_[a]) return false;
    out[a] = static_cast<int>(r);
  }
  return true;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw Error(std::string("grid mismatch in ") + what);
}

}  // namespace rmatlas
