#include "rmatlas/fields.hpp"

#include "rmatlas/error.hpp"

namespace rmatlas {

Mat unpack_symmetric(std::span<const double> packed, int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = m(j, i) = packed[packed_index(n, i, j)];
  return m;
}

void pack_symmetric(const Mat& m, std::span<double> packed) {
  const int n = static_cast<int>(m.rows());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) packed[packed_index(n, i, j)] = 0.5 * (m(i, j) + m(j, i));
}

ScalarField ScalarField::from_function(const Grid& grid, const std::function<double(const Vec&)>& fn) {
  ScalarField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = fn(grid.position(i));
  return f;
}

VectorField VectorField::from_function(const Grid& grid, const std::function<Vec(const Vec&)>& fn) {
  VectorField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f.set(i, fn(grid.position(i)));
  return f;
}

Vec VectorField::at(std::size_t i) const {
  const int n = ncomp_;
  Vec v(n);
  const double* p = data_.data() + i * n;
  for (int a = 0; a < n; ++a) v[a] = p[a];
  return v;
}

void VectorField::set(std::size_t i, const Vec& v) {
  double* p = data_.data() + i * ncomp_;
  for (int a = 0; a < ncomp_; ++a) p[a] = v[a];
}

MetricField MetricField::identity(const Grid& grid) {
  MetricField f(grid);
  const int n = grid.dim();
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (int a = 0; a < n; ++a) f.data_[i * f.ncomp_ + packed_index(n, a, a)] = 1.0;
  f.spd_ = true;
  return f;
}

MetricField MetricField::constant(const Grid& grid, const Mat& m) {
  MetricField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f.set(i, m);
  return f;
}

MetricField MetricField::from_function(const Grid& grid, const std::function<Mat(const Vec&)>& fn) {
  MetricField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f.set(i, fn(grid.position(i)));
  return f;
}

Mat MetricField::at(std::size_t i) const { return unpack_symmetric(voxel(i), grid_.dim()); }

void MetricField::set(std::size_t i, const Mat& m) {
  if (m.rows() != grid_.dim() || m.cols() != grid_.dim()) throw Error("matrix size does not match grid dimension");
  pack_symmetric(m, voxel(i));
}

MaskField MaskField::from_function(const Grid& grid, const std::function<bool(const Vec&)>& fn) {
  MaskField m(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) m.set(i, fn(grid.position(i)));
  return m;
}

std::size_t MaskField::count() const noexcept {
  std::size_t c = 0;
  for (auto v : data_) c += v != 0;
  return c;
}

std::vector<int> MaskField::component_labels() const {
  std::vector<int> label(data_.size(), -1);
  std::vector<std::size_t> stack;
  int next = 0;
  const int n = grid_.dim();
  for (std::size_t s = 0; s < data_.size(); ++s) {
    if (!data_[s] || label[s] >= 0) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      const Index3 c = grid_.coords(v);
      for (int a = 0; a < n; ++a) {
        for (int d : {-1, 1}) {
          Index3 q = c;
          q[a] += d;
          if (!grid_.contains(q)) continue;
          const std::size_t qi = grid_.index(q);
          if (data_[qi] && label[qi] < 0) {
            label[qi] = next;
            stack.push_back(qi);
          }
        }
      }
    }
    ++next;
  }
  return label;
}

int MaskField::component_count() const {
  int best = -1;
  for (int l : component_labels()) best = l > best ? l : best;
  return best + 1;
}

MaskField MaskField::pruned() const {
  MaskField out = *this;
  const int n = grid_.dim();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < out.data_.size(); ++i) {
      if (!out.data_[i]) continue;
      const Index3 c = grid_.coords(i);
      for (int a = 0; a < n; ++a) {
        Index3 lo = c, hi = c;
        --lo[a];
        ++hi[a];
        if (!out.at(lo) && !out.at(hi)) {
          out.data_[i] = 0;
          changed = true;
          break;
        }
      }
    }
  }
  return out;
}

void MaskField::validate() const {
  const int n = grid_.dim();
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!data_[i]) continue;
    const Index3 c = grid_.coords(i);
    bool interior = true;
    for (int a = 0; a < n; ++a) interior = interior && c[a] > 0 && c[a] < grid_.shape()[a] - 1;
    if (interior) return;
  }
  throw Error("mask has no interior voxel set");
}

}  // namespace rmatlas
