#include "rmatlas/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rmatlas/spd.hpp"

namespace rmatlas {

namespace {

struct AxisCell {
  int i0 = 0;
  double t = 0.0;
  bool clamped = false;
};

AxisCell locate(const Grid& grid, const Vec& p, int a) {
  AxisCell c;
  const int n = grid.shape()[a];
  double v = (p[a] - grid.origin()[a]) / grid.spacing()[a];
  if (!(v >= 0.0)) {  // also catches NaN
    c.clamped = true;
    v = 0.0;
  } else if (v > n - 1) {
    c.clamped = true;
    v = n - 1;
  }
  int i0 = static_cast<int>(std::floor(v));
  if (i0 > n - 2) i0 = n - 2;
  c.i0 = i0;
  c.t = v - i0;
  return c;
}

// Corner weights with per-axis (i0, t); the derivative axis (if >= 0) uses
// weights (-1/h, +1/h) instead of (1-t, t).
void corners(const Grid& grid, const std::array<AxisCell, 3>& cells, int deriv_axis, double scale,
             DerivativeWeights& out) {
  const int n = grid.dim();
  const int ncorner = 1 << n;
  for (int c = 0; c < ncorner; ++c) {
    Index3 ijk{0, 0, 0};
    double w = scale;
    for (int a = 0; a < n; ++a) {
      const int bit = (c >> a) & 1;
      ijk[a] = cells[a].i0 + bit;
      if (a == deriv_axis) {
        w *= (bit ? 1.0 : -1.0) / grid.spacing()[a];
      } else {
        w *= bit ? cells[a].t : 1.0 - cells[a].t;
      }
    }
    out.index[out.count] = grid.index(ijk);
    out.weight[out.count] = w;
    ++out.count;
  }
}

}  // namespace

SampleWeights sample_weights(const Grid& grid, const Vec& p) {
  const int n = std::min(grid.dim(), 3);
  std::array<AxisCell, 3> cells{};
  SampleWeights s;
  for (int a = 0; a < n; ++a) {
    cells[a] = locate(grid, p, a);
    s.out_of_domain = s.out_of_domain || cells[a].clamped;
  }
  const int ncorner = 1 << n;
  for (int c = 0; c < ncorner; ++c) {
    Index3 ijk{0, 0, 0};
    double w = 1.0;
    for (int a = 0; a < n; ++a) {
      const int bit = (c >> a) & 1;
      ijk[a] = cells[a].i0 + bit;
      w *= bit ? cells[a].t : 1.0 - cells[a].t;
    }
    s.index[c] = grid.index(ijk);
    s.weight[c] = w;
  }
  s.count = ncorner;
  return s;
}

DerivativeWeights derivative_weights(const Grid& grid, const Vec& p, int axis) {
  const int n = std::min(grid.dim(), 3);
  std::array<AxisCell, 3> cells{};
  for (int a = 0; a < n; ++a) cells[a] = locate(grid, p, a);
  DerivativeWeights d;
  if (cells[axis].clamped) return d;
  if (cells[axis].t == 0.0 && cells[axis].i0 > 0) {
    // on an interior lattice plane: average the slopes of both adjacent cells
    corners(grid, cells, axis, 0.5, d);
    auto left = cells;
    left[axis].i0 -= 1;
    corners(grid, left, axis, 0.5, d);
  } else {
    corners(grid, cells, axis, 1.0, d);
  }
  return d;
}

void interpolate_into(const FieldBase& field, const SampleWeights& w, std::span<double> out) {
  const int nc = field.components();
  for (int k = 0; k < nc; ++k) out[k] = 0.0;
  for (int c = 0; c < w.count; ++c) {
    if (w.weight[c] == 0.0) continue;
    const auto v = field.voxel(w.index[c]);
    for (int k = 0; k < nc; ++k) out[k] += w.weight[c] * v[k];
  }
}

void interpolate_into(const FieldBase& field, const DerivativeWeights& w, std::span<double> out) {
  const int nc = field.components();
  for (int k = 0; k < nc; ++k) out[k] = 0.0;
  for (int c = 0; c < w.count; ++c) {
    const auto v = field.voxel(w.index[c]);
    for (int k = 0; k < nc; ++k) out[k] += w.weight[c] * v[k];
  }
}

double interpolate(const ScalarField& f, const Vec& p, bool* out_of_domain) {
  const SampleWeights w = sample_weights(f.grid(), p);
  if (out_of_domain) *out_of_domain = w.out_of_domain;
  double v = 0.0;
  interpolate_into(f, w, {&v, 1});
  return v;
}

Vec interpolate(const VectorField& f, const Vec& p, bool* out_of_domain) {
  const SampleWeights w = sample_weights(f.grid(), p);
  if (out_of_domain) *out_of_domain = w.out_of_domain;
  std::array<double, 3> buf{};
  interpolate_into(f, w, {buf.data(), static_cast<std::size_t>(f.components())});
  Vec v(f.components());
  for (int a = 0; a < f.components(); ++a) v[a] = buf[a];
  return v;
}

Mat interpolate(const MetricField& f, const Vec& p, bool* out_of_domain) {
  const SampleWeights w = sample_weights(f.grid(), p);
  if (out_of_domain) *out_of_domain = w.out_of_domain;
  std::array<double, 6> buf{};
  interpolate_into(f, w, {buf.data(), static_cast<std::size_t>(f.components())});
  return unpack_symmetric({buf.data(), static_cast<std::size_t>(f.components())}, f.grid().dim());
}

Mat interpolate_spd(const MetricField& f, const Vec& p, bool* out_of_domain) {
  return spd_project(interpolate(f, p, out_of_domain));
}

bool interpolate(const MaskField& m, const Vec& p, bool* out_of_domain) {
  Index3 ijk;
  const bool inside = m.grid().nearest(p, ijk);
  if (out_of_domain) *out_of_domain = !inside;
  return inside && m[m.grid().index(ijk)];
}

}  // namespace rmatlas
