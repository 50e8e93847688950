#include "rmatlas/poisson.hpp"

#include <cmath>
#include <vector>

#include "rmatlas/error.hpp"

namespace rmatlas {

Eigen::VectorXd conjugate_gradient(const SparseMatrix& a, const Eigen::VectorXd& rhs, const CgSettings& settings,
                                   CgReport* report, const char* what) {
  const Eigen::Index n = rhs.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    if (report) *report = {0, 0.0};
    return x;
  }
  const int max_it = settings.max_iterations > 0
                         ? settings.max_iterations
                         : static_cast<int>(100.0 * std::sqrt(static_cast<double>(n))) + 100;
  Eigen::VectorXd inv_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = a.coeff(i, i);
    inv_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
  }
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd ap(n);
  double rz = r.dot(z);
  double rel = 1.0;
  int it = 0;
  for (; it < max_it; ++it) {
    rel = r.norm() / bnorm;
    if (rel <= settings.tolerance) break;
    ap.noalias() = a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  // recompute the true residual so drift in the recurrence is not reported as convergence
  rel = (rhs - a * x).norm() / bnorm;
  if (report) *report = {it, rel};
  if (!(rel <= settings.tolerance * 10.0)) throw SolverError(what, rel, it);
  return x;
}

DirichletLaplacian::DirichletLaplacian(const Grid& grid) : grid_(grid), unknown_of_voxel_(grid.size(), -1) {
  const int n = grid.dim();
  auto interior = [&](const Index3& c) {
    for (int a = 0; a < n; ++a)
      if (c[a] <= 0 || c[a] >= grid.shape()[a] - 1) return false;
    return true;
  };
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (!interior(grid.coords(v))) continue;
    unknown_of_voxel_[v] = static_cast<std::ptrdiff_t>(voxel_of_unknown_.size());
    voxel_of_unknown_.push_back(v);
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(voxel_of_unknown_.size() * (2 * n + 1));
  for (std::size_t u = 0; u < voxel_of_unknown_.size(); ++u) {
    const std::size_t v = voxel_of_unknown_[u];
    const Index3 c = grid.coords(v);
    double diag = 0.0;
    for (int a = 0; a < n; ++a) {
      const double w = 1.0 / (grid.spacing()[a] * grid.spacing()[a]);
      diag += 2.0 * w;
      for (int d : {-1, 1}) {
        Index3 q = c;
        q[a] += d;
        const auto qu = unknown_of_voxel_[grid.index(q)];
        if (qu >= 0) trips.emplace_back(static_cast<int>(u), static_cast<int>(qu), -w);
      }
    }
    trips.emplace_back(static_cast<int>(u), static_cast<int>(u), diag);
  }
  matrix_.resize(static_cast<Eigen::Index>(voxel_of_unknown_.size()),
                 static_cast<Eigen::Index>(voxel_of_unknown_.size()));
  matrix_.setFromTriplets(trips.begin(), trips.end());
}

Eigen::VectorXd DirichletLaplacian::solve_component(const std::vector<double>& rhs, const CgSettings& settings,
                                                    CgReport* report) const {
  Eigen::VectorXd b(static_cast<Eigen::Index>(voxel_of_unknown_.size()));
  for (std::size_t u = 0; u < voxel_of_unknown_.size(); ++u) b[static_cast<Eigen::Index>(u)] = rhs[voxel_of_unknown_[u]];
  return conjugate_gradient(matrix_, b, settings, report, "Dirichlet Poisson solve");
}

VectorField DirichletLaplacian::solve(const VectorField& f, const CgSettings& settings, CgReport* report) const {
  require_same_grid(grid_, f.grid(), "DirichletLaplacian::solve");
  const int n = grid_.dim();
  VectorField out(grid_);
  std::vector<double> rhs(grid_.size());
  CgReport worst;
  for (int a = 0; a < n; ++a) {
    for (std::size_t v = 0; v < grid_.size(); ++v) rhs[v] = f.voxel(v)[a];
    CgReport rep;
    const Eigen::VectorXd x = solve_component(rhs, settings, &rep);
    worst.iterations = std::max(worst.iterations, rep.iterations);
    worst.relative_residual = std::max(worst.relative_residual, rep.relative_residual);
    for (std::size_t u = 0; u < voxel_of_unknown_.size(); ++u)
      out.voxel(voxel_of_unknown_[u])[a] = x[static_cast<Eigen::Index>(u)];
  }
  if (report) *report = worst;
  return out;
}

ScalarField DirichletLaplacian::solve(const ScalarField& f, const CgSettings& settings, CgReport* report) const {
  require_same_grid(grid_, f.grid(), "DirichletLaplacian::solve");
  std::vector<double> rhs(f.data().begin(), f.data().end());
  const Eigen::VectorXd x = solve_component(rhs, settings, report);
  ScalarField out(grid_);
  for (std::size_t u = 0; u < voxel_of_unknown_.size(); ++u) out[voxel_of_unknown_[u]] = x[static_cast<Eigen::Index>(u)];
  return out;
}

ScalarField DirichletLaplacian::apply_laplacian(const ScalarField& u) const {
  require_same_grid(grid_, u.grid(), "DirichletLaplacian::apply_laplacian");
  ScalarField out(grid_);
  const int n = grid_.dim();
  for (std::size_t v : voxel_of_unknown_) {
    const Index3 c = grid_.coords(v);
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
      const double w = 1.0 / (grid_.spacing()[a] * grid_.spacing()[a]);
      Index3 lo = c, hi = c;
      lo[a] -= 1;
      hi[a] += 1;
      s += w * (u[grid_.index(lo)] - 2.0 * u[v] + u[grid_.index(hi)]);
    }
    out[v] = s;
  }
  return out;
}

}  // namespace rmatlas
