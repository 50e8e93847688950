#include "rmatlas/diffeomorphism.hpp"

#include <algorithm>
#include <limits>

#include "rmatlas/differential.hpp"
#include "rmatlas/error.hpp"
#include "rmatlas/interpolate.hpp"
#include "rmatlas/parallel.hpp"
#include "rmatlas/spd.hpp"

namespace rmatlas {

Diffeomorphism::Diffeomorphism(const Grid& grid) : u_(grid) {}

Diffeomorphism::Diffeomorphism(VectorField displacement) : u_(std::move(displacement)) {}

bool Diffeomorphism::is_identity() const noexcept {
  return std::all_of(u_.data().begin(), u_.data().end(), [](double x) { return x == 0.0; });
}

Vec Diffeomorphism::apply(std::size_t voxel) const { return grid().position(voxel) + u_.at(voxel); }

Vec Diffeomorphism::apply_point(const Vec& p) const { return p + interpolate(u_, p); }

Mat Diffeomorphism::jacobian(std::size_t voxel) const {
  const int n = grid().dim();
  Mat j = Mat::Identity(n, n);
  for (int b = 0; b < n; ++b) {
    const AxisStencil st = derivative_stencil(grid(), nullptr, voxel, b);
    for (int a = 0; a < n; ++a) j(a, b) += partial(u_, a, st, voxel);
  }
  return j;
}

double Diffeomorphism::min_jacobian_determinant(const MaskField& mask) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < grid().size(); ++v)
    if (mask[v]) best = std::min(best, jacobian(v).determinant());
  return best;
}

Diffeomorphism compose(const Diffeomorphism& psi, const Diffeomorphism& phi) {
  require_same_grid(psi.grid(), phi.grid(), "compose");
  VectorField u(phi.grid());
  for (std::size_t v = 0; v < u.size(); ++v) {
    const Vec y = phi.apply(v);
    u.set(v, psi.apply_point(y) - phi.grid().position(v));
  }
  return Diffeomorphism(std::move(u));
}

MetricField pullback_metric(const Diffeomorphism& phi, const MetricField& g, const MaskField& mask, bool project) {
  require_same_grid(phi.grid(), g.grid(), "pullback_metric");
  require_same_grid(phi.grid(), mask.grid(), "pullback_metric");
  if (phi.is_identity()) return project ? spd_project(g) : g;
  const Grid& grid = g.grid();
  MetricField out(grid);
  std::vector<double> bad(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t v) {
    const Mat j = phi.jacobian(v);
    if (mask[v] && !(j.determinant() > 0.0)) {
      bad[v] = 1.0;
      return;
    }
    Mat m = j.transpose() * interpolate(g, phi.apply(v)) * j;
    m = symmetrize(m);
    out.set(v, project ? spd_project(m) : m);
  });
  for (std::size_t v = 0; v < grid.size(); ++v)
    if (bad[v] != 0.0) throw NotPositiveDefinite(v, "pullback_metric: det(d phi) <= 0");
  out.set_spd_flag(project || all_spd(out, mask));
  return out;
}

MetricField pullback_metric(const Diffeomorphism& phi, const MetricField& g) {
  return pullback_metric(phi, g, MaskField::full(g.grid()));
}

MaskField warp_mask(const MaskField& mask, const Diffeomorphism& phi) {
  require_same_grid(phi.grid(), mask.grid(), "warp_mask");
  if (phi.is_identity()) return mask;
  MaskField out(mask.grid());
  for (std::size_t v = 0; v < out.size(); ++v) out.set(v, interpolate(mask, phi.apply(v)));
  return out;
}

}  // namespace rmatlas
