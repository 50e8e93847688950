#include "rmatlas/ebin.hpp"

#include <cmath>
#include <numbers>

#include "rmatlas/error.hpp"
#include "rmatlas/parallel.hpp"
#include "rmatlas/spd.hpp"

namespace rmatlas {

namespace {

constexpr double kPi = std::numbers::pi;

double quartic_root_det(const SymEig& e) {
  double d = 1.0;
  for (int i = 0; i < e.values.size(); ++i) d *= e.values[i];
  return std::pow(d, 0.25);
}

}  // namespace

VoxelGeodesic::VoxelGeodesic(const Mat& g0, const Mat& g1) : n_(static_cast<int>(g0.rows())), g0_(g0), g1_(g1) {
  const SymEig e0 = sym_eig(g0);
  if (!(e0.values.minCoeff() >= kEpsPD)) throw Error("Ebin path: g0 is not positive-definite");
  const SymEig e1 = sym_eig(g1);
  if (!(e1.values.minCoeff() >= kEpsPD)) throw Error("Ebin path: g1 is not positive-definite");
  sqrt0_ = sym_apply(e0, [](double x) { return std::sqrt(x); });
  isqrt0_ = sym_apply(e0, [](double x) { return 1.0 / std::sqrt(x); });
  Mat s = Mat::Zero(n_, n_);
  if (g0 != g1) {
    const SymEig em = sym_eig(symmetrize(isqrt0_ * g1 * isqrt0_));
    if (!(em.values.minCoeff() > 0.0)) throw Error("Ebin path: relative metric is not positive-definite");
    s = sym_apply(em, [](double x) { return std::log(x); });
  }
  trace_s_ = s.trace();
  s0_ = s - (trace_s_ / n_) * Mat::Identity(n_, n_);
  a_ = quartic_root_det(e0);
  b_ = quartic_root_det(e1);
  kappa_ = std::sqrt(n_ * s0_.squaredNorm()) / 4.0;
}

double VoxelGeodesic::theta() const noexcept { return kappa_ < kPi ? kappa_ : kPi; }

Mat VoxelGeodesic::k() const {
  return isqrt0_ * (s0_ + (trace_s_ / n_) * Mat::Identity(n_, n_)) * sqrt0_;
}

Mat VoxelGeodesic::k0() const { return isqrt0_ * s0_ * sqrt0_; }

Mat VoxelGeodesic::at(double t) const {
  if (t == 0.0) return g0_;
  const double p = 4.0 / n_;
  if (kappa_ < kKappaZero) {
    const double q = 1.0 + t * (b_ - a_) / a_;
    return std::pow(q, p) * g0_;
  }
  if (kappa_ >= kPi) {
    const double split = a_ / (a_ + b_);
    if (t <= split) return std::pow(std::max(0.0, 1.0 - (a_ + b_) / a_ * t), p) * g0_;
    return std::pow(std::max(0.0, (a_ + b_) / b_ * t - a_ / b_), p) * g1_;
  }
  const double q = 1.0 + t * (b_ * std::cos(kappa_) - a_) / a_;
  const double r = t * b_ * std::sin(kappa_) / a_;
  const double angle = std::atan2(r, q);
  const SymEig es = sym_eig(s0_);
  const double c = angle / kappa_;
  const Mat rot = sym_apply(es, [c](double x) { return std::exp(c * x); });
  return symmetrize(std::pow(q * q + r * r, 2.0 / n_) * (sqrt0_ * rot * sqrt0_));
}

double VoxelGeodesic::sq_distance_density() const noexcept {
  const double half = std::sin(0.5 * theta());
  return 16.0 / n_ * ((a_ - b_) * (a_ - b_) + 4.0 * a_ * b_ * half * half);
}

double ebin_inner_product(const MetricField& g, const MetricField& h, const MetricField& k, const MaskField& mask) {
  require_same_grid(g.grid(), h.grid(), "ebin_inner_product");
  require_same_grid(g.grid(), k.grid(), "ebin_inner_product");
  require_same_grid(g.grid(), mask.grid(), "ebin_inner_product");
  std::vector<double> terms(g.size(), 0.0);
  parallel_for(g.size(), [&](std::size_t i) {
    if (!mask[i]) return;
    const Mat gm = g.at(i);
    const Eigen::LDLT<Mat> ldlt(gm);
    const Mat a = ldlt.solve(h.at(i));
    const Mat b = ldlt.solve(k.at(i));
    terms[i] = (a * b).trace() * std::sqrt(gm.determinant());
  });
  return tree_sum(terms) * g.grid().cell_volume();
}

GeodesicCoefficients compute_coefficients(const MetricField& g0, const MetricField& g1, const MaskField& mask) {
  require_same_grid(g0.grid(), g1.grid(), "compute_coefficients");
  require_same_grid(g0.grid(), mask.grid(), "compute_coefficients");
  const Grid& grid = g0.grid();
  const int n = grid.dim();
  GeodesicCoefficients c{grid, std::vector<Mat>(grid.size(), Mat::Zero(n, n)),
                         std::vector<Mat>(grid.size(), Mat::Zero(n, n)), ScalarField(grid, 1.0),
                         ScalarField(grid, 1.0), ScalarField(grid, 0.0)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!mask[i]) continue;
    if (!is_spd(g0.at(i))) throw NotPositiveDefinite(i, "compute_coefficients: g0");
    if (!is_spd(g1.at(i))) throw NotPositiveDefinite(i, "compute_coefficients: g1");
    const VoxelGeodesic path(g0.at(i), g1.at(i));
    c.k[i] = path.k();
    c.k0[i] = path.k0();
    c.a[i] = path.a();
    c.b[i] = path.b();
    c.kappa[i] = path.kappa();
  }
  return c;
}

MetricField ebin_geodesic(const MetricField& g0, const MetricField& g1, double t, const MaskField& mask) {
  require_same_grid(g0.grid(), g1.grid(), "ebin_geodesic");
  require_same_grid(g0.grid(), mask.grid(), "ebin_geodesic");
  if (!(t >= 0.0 && t <= 1.0)) throw Error("ebin_geodesic: t must lie in [0, 1]");
  MetricField out = g0;
  std::vector<unsigned char> degenerate(g0.size(), 0);
  parallel_for(g0.size(), [&](std::size_t i) {
    if (!mask[i]) return;
    if (!is_spd(g0.at(i))) throw NotPositiveDefinite(i, "ebin_geodesic: g0");
    if (!is_spd(g1.at(i))) throw NotPositiveDefinite(i, "ebin_geodesic: g1");
    const Mat m = VoxelGeodesic(g0.at(i), g1.at(i)).at(t);
    out.set(i, m);
    degenerate[i] = !is_spd(m);
  });
  bool spd = true;
  for (auto d : degenerate) spd = spd && !d;
  out.set_spd_flag(spd);
  return out;
}

ScalarField ebin_sq_distance_density(const MetricField& g0, const MetricField& g1, const MaskField& mask) {
  require_same_grid(g0.grid(), g1.grid(), "ebin_distance");
  require_same_grid(g0.grid(), mask.grid(), "ebin_distance");
  ScalarField out(g0.grid());
  parallel_for(g0.size(), [&](std::size_t i) {
    if (!mask[i]) return;
    if (!is_spd(g0.at(i))) throw NotPositiveDefinite(i, "ebin_distance: g0");
    if (!is_spd(g1.at(i))) throw NotPositiveDefinite(i, "ebin_distance: g1");
    out[i] = VoxelGeodesic(g0.at(i), g1.at(i)).sq_distance_density();
  });
  return out;
}

double ebin_sq_distance(const MetricField& g0, const MetricField& g1, const MaskField& mask) {
  const ScalarField d = ebin_sq_distance_density(g0, g1, mask);
  return tree_sum(d.data()) * g0.grid().cell_volume();
}

double ebin_distance(const MetricField& g0, const MetricField& g1, const MaskField& mask) {
  return std::sqrt(std::max(0.0, ebin_sq_distance(g0, g1, mask)));
}

MetricField frechet_mean(std::span<const MetricField> metrics, const MaskField& mask) {
  if (metrics.empty()) throw Error("frechet_mean: empty input list");
  const Grid& grid = metrics.front().grid();
  require_same_grid(grid, mask.grid(), "frechet_mean");
  for (const auto& m : metrics) require_same_grid(grid, m.grid(), "frechet_mean");
  MetricField mean = MetricField::identity(grid);
  parallel_for(grid.size(), [&](std::size_t v) {
    if (!mask[v]) return;
    Mat current = metrics[0].at(v);
    if (!is_spd(current)) throw NotPositiveDefinite(v, "frechet_mean: input 0");
    for (std::size_t i = 1; i < metrics.size(); ++i) {
      const Mat next = metrics[i].at(v);
      if (!is_spd(next)) throw NotPositiveDefinite(v, "frechet_mean: input " + std::to_string(i));
      current = spd_project(VoxelGeodesic(current, next).at(1.0 / static_cast<double>(i + 1)));
    }
    mean.set(v, current);
  });
  mean.set_spd_flag(true);
  return mean;
}

}  // namespace rmatlas
