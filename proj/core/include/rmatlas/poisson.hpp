#pragma once

#include <Eigen/Sparse>

#include "rmatlas/fields.hpp"

namespace rmatlas {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct CgSettings {
  double tolerance = 1e-8;
  int max_iterations = 0;  // 0 selects a size-dependent default
};

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradient on a symmetric positive
/// (semi-)definite system. Throws SolverError when the tolerance is not met.
Eigen::VectorXd conjugate_gradient(const SparseMatrix& a, const Eigen::VectorXd& rhs, const CgSettings& settings,
                                   CgReport* report = nullptr, const char* what = "conjugate gradient");

/// Standard 5/7-point negative Laplacian -Delta on the lattice with zero
/// Dirichlet values on the grid boundary. Unknowns are the interior voxels.
class DirichletLaplacian {
 public:
  explicit DirichletLaplacian(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  /// Solves -Delta u = f for each component (boundary values of u are zero;
  /// f on boundary voxels is ignored).
  VectorField solve(const VectorField& f, const CgSettings& settings = {}, CgReport* report = nullptr) const;
  ScalarField solve(const ScalarField& f, const CgSettings& settings = {}, CgReport* report = nullptr) const;
  /// Applies the discrete Laplacian Delta (not negated) to a field; zero on boundary voxels.
  ScalarField apply_laplacian(const ScalarField& u) const;

 private:
  Eigen::VectorXd solve_component(const std::vector<double>& rhs, const CgSettings& settings, CgReport* report) const;

  Grid grid_;
  std::vector<std::ptrdiff_t> unknown_of_voxel_;
  std::vector<std::size_t> voxel_of_unknown_;
  SparseMatrix matrix_;
};

}  // namespace rmatlas
