#include "rmatlas/differential.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "rmatlas/error.hpp"
#include "rmatlas/spd.hpp"

namespace rmatlas {

namespace {

bool usable(const Grid& grid, const MaskField* mask, const Index3& c) {
  if (!grid.contains(c)) return false;
  return mask == nullptr || (*mask)[grid.index(c)];
}

}  // namespace

AxisStencil derivative_stencil(const Grid& grid, const MaskField* mask, std::size_t voxel, int axis) {
  const Index3 c = grid.coords(voxel);
  const double h = grid.spacing()[axis];
  const auto s = static_cast<std::ptrdiff_t>(grid.stride(axis));
  auto shifted = [&](int d) {
    Index3 q = c;
    q[axis] += d;
    return usable(grid, mask, q);
  };
  const bool m1 = shifted(-1), p1 = shifted(1);
  AxisStencil st;
  if (m1 && p1) {
    st.offset = {-s, s, 0};
    st.weight = {-0.5 / h, 0.5 / h, 0.0};
    st.count = 2;
  } else if (p1 && shifted(2)) {
    st.offset = {0, s, 2 * s};
    st.weight = {-1.5 / h, 2.0 / h, -0.5 / h};
    st.count = 3;
  } else if (m1 && shifted(-2)) {
    st.offset = {0, -s, -2 * s};
    st.weight = {1.5 / h, -2.0 / h, 0.5 / h};
    st.count = 3;
  } else if (p1) {
    st.offset = {0, s, 0};
    st.weight = {-1.0 / h, 1.0 / h, 0.0};
    st.count = 2;
  } else if (m1) {
    st.offset = {0, -s, 0};
    st.weight = {1.0 / h, -1.0 / h, 0.0};
    st.count = 2;
  } else {
    throw Error("voxel " + std::to_string(voxel) + " has no masked neighbour along axis " + std::to_string(axis));
  }
  return st;
}

double partial(const FieldBase& field, int component, const AxisStencil& st, std::size_t voxel) {
  const auto data = field.data();
  const auto nc = static_cast<std::ptrdiff_t>(field.components());
  // differences against the centre value keep constants exactly in the kernel
  const double centre = data[voxel * static_cast<std::size_t>(nc) + static_cast<std::size_t>(component)];
  double d = 0.0;
  for (int m = 0; m < st.count; ++m) {
    const auto at = static_cast<std::ptrdiff_t>(voxel) + st.offset[m];
    d += st.weight[m] * (data[static_cast<std::size_t>(at * nc + component)] - centre);
  }
  return d;
}

ChristoffelField christoffel_symbols(const MetricField& g, const MaskField& mask) {
  require_same_grid(g.grid(), mask.grid(), "christoffel_symbols");
  const Grid& grid = g.grid();
  const int n = grid.dim();
  ChristoffelField out(grid);
  std::array<Mat, 3> dg;
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (!mask[v]) continue;
    for (int l = 0; l < n; ++l) {
      const AxisStencil st = derivative_stencil(grid, &mask, v, l);
      Mat d(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) d(i, j) = d(j, i) = partial(g, packed_index(n, i, j), st, v);
      dg[l] = d;
    }
    const Mat ginv = matrix_function(g.at(v), MatrixFunction::Inverse);
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          double s = 0.0;
          for (int m = 0; m < n; ++m) s += ginv(k, m) * (dg[i](j, m) + dg[j](i, m) - dg[m](i, j));
          out(v, k, i, j) = 0.5 * s;
        }
      }
    }
  }
  return out;
}

VectorField covariant_derivative_vv(const VectorField& v, const ChristoffelField& gamma, const MaskField& mask) {
  require_same_grid(v.grid(), mask.grid(), "covariant_derivative_vv");
  require_same_grid(v.grid(), gamma.grid(), "covariant_derivative_vv");
  const Grid& grid = v.grid();
  const int n = grid.dim();
  VectorField out(grid);
  for (std::size_t x = 0; x < grid.size(); ++x) {
    if (!mask[x]) continue;
    const Vec vx = v.at(x);
    Vec acc = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
      const AxisStencil st = derivative_stencil(grid, &mask, x, i);
      for (int k = 0; k < n; ++k) acc[k] += vx[i] * partial(v, k, st, x);
    }
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc[k] += gamma(x, k, i, j) * vx[i] * vx[j];
    out.set(x, acc);
  }
  return out;
}

VectorField covariant_derivative_vv(const VectorField& v, const MetricField& g, const MaskField& mask) {
  return covariant_derivative_vv(v, christoffel_symbols(g, mask), mask);
}

ScalarField riemannian_divergence(const VectorField& x, const MetricField& g, const MaskField& mask) {
  require_same_grid(x.grid(), g.grid(), "riemannian_divergence");
  require_same_grid(x.grid(), mask.grid(), "riemannian_divergence");
  const Grid& grid = x.grid();
  const int n = grid.dim();
  std::vector<double> vol(grid.size(), 1.0);
  VectorField weighted(grid);
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (!mask[v]) continue;
    vol[v] = std::sqrt(g.at(v).determinant());
    weighted.set(v, vol[v] * x.at(v));
  }
  ScalarField out(grid);
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (!mask[v]) continue;
    double d = 0.0;
    for (int a = 0; a < n; ++a) d += partial(weighted, a, derivative_stencil(grid, &mask, v, a), v);
    out[v] = d / vol[v];
  }
  return out;
}

VectorField differential(const ScalarField& alpha, const MaskField& mask) {
  require_same_grid(alpha.grid(), mask.grid(), "differential");
  const Grid& grid = alpha.grid();
  const int n = grid.dim();
  VectorField out(grid);
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (!mask[v]) continue;
    Vec d(n);
    for (int a = 0; a < n; ++a) d[a] = partial(alpha, 0, derivative_stencil(grid, &mask, v, a), v);
    out.set(v, d);
  }
  return out;
}

VectorField riemannian_gradient(const ScalarField& alpha, const MetricField& g, const MaskField& mask) {
  require_same_grid(alpha.grid(), g.grid(), "riemannian_gradient");
  VectorField d = differential(alpha, mask);
  for (std::size_t v = 0; v < d.size(); ++v) {
    if (!mask[v]) continue;
    d.set(v, g.at(v).ldlt().solve(d.at(v)));
  }
  return d;
}

}  // namespace rmatlas
