#pragma once

#include <Eigen/Dense>

namespace rmatlas {

// Small dense types sized for n <= 3 without heap allocation.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

/// Lower bound on eigenvalues of anything treated as positive-definite.
inline constexpr double kEpsPD = 1e-12;

/// Number of packed components of a symmetric n x n matrix.
constexpr int packed_size(int n) { return n * (n + 1) / 2; }

/// Position of (i, j) in the packed upper triangle, row-major: 2D g11,g12,g22; 3D g11,g12,g13,g22,g23,g33.
constexpr int packed_index(int n, int i, int j) {
  if (i > j) {
    const int t = i;
    i = j;
    j = t;
  }
  return i * n - i * (i - 1) / 2 + (j - i);
}

/// Symmetric eigendecomposition; eigenvalues ascending.
struct SymEig {
  Vec values;
  Mat vectors;
};

SymEig sym_eig(const Mat& a);

/// Rebuild V diag(f(lambda)) V^T.
template <class F>
Mat sym_apply(const SymEig& e, F&& f) {
  const int n = static_cast<int>(e.values.size());
  Vec fv(n);
  for (int i = 0; i < n; ++i) fv[i] = f(e.values[i]);
  return e.vectors * fv.asDiagonal() * e.vectors.transpose();
}

inline Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

}  // namespace rmatlas
