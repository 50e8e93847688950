#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rmatlas {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A voxel that must hold a positive-definite matrix does not.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(std::size_t voxel, const std::string& what)
      : Error(what + " (voxel " + std::to_string(voxel) + ")"), voxel_(voxel) {}

  std::size_t voxel() const noexcept { return voxel_; }

 private:
  std::size_t voxel_;
};

/// An iterative solver stopped before reaching its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double relative_residual, int iterations)
      : Error(what + ": relative residual " + std::to_string(relative_residual) + " after " +
              std::to_string(iterations) + " iterations"),
        relative_residual_(relative_residual),
        iterations_(iterations) {}

  double relative_residual() const noexcept { return relative_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double relative_residual_;
  int iterations_;
};

}  // namespace rmatlas
