#include "rmatlas/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace rmatlas {

SymEig sym_eig(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(a, Eigen::ComputeEigenvectors);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace rmatlas
