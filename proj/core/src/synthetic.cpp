#include "rmatlas/synthetic.hpp"

#include <cmath>
#include <limits>

#include "rmatlas/error.hpp"
#include "rmatlas/parallel.hpp"

namespace rmatlas {

namespace {

constexpr int kSamples = 4001;

struct Sampling {
  double x0;
  double dx;
};

Sampling sampling_for(const CubicFamilySpec& spec) {
  const Grid& g = spec.grid;
  const double lo = g.origin()[0] - 1.0;
  const double hi = g.origin()[0] + (g.shape()[0] - 1) * g.spacing()[0] + 1.0;
  return {lo, (hi - lo) / (kSamples - 1)};
}

double foot_point(const CubicFamilySpec& spec, const Sampling& s, double px, double py) {
  double best = std::numeric_limits<double>::infinity();
  double xb = s.x0;
  for (int i = 0; i < kSamples; ++i) {
    const double x = s.x0 + i * s.dx;
    const double dy = spec.y(x) - py;
    const double d = (x - px) * (x - px) + dy * dy;
    if (d < best) {
      best = d;
      xb = x;
    }
  }
  // Newton on the stationarity condition (x - px) + (y(x) - py) y'(x) = 0.
  for (int it = 0; it < 30; ++it) {
    const double r = spec.y(xb) - py;
    const double f = (xb - px) + r * spec.slope(xb);
    const double df = 1.0 + spec.slope(xb) * spec.slope(xb) + r * spec.curvature_term(xb);
    if (df <= 0.0) break;
    const double step = f / df;
    if (std::abs(step) > s.dx) break;
    xb -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return xb;
}

}  // namespace

double CubicFamilySpec::y(double x) const noexcept {
  return ((coeffs[0] * x + coeffs[1]) * x + coeffs[2]) * x + coeffs[3];
}

double CubicFamilySpec::slope(double x) const noexcept {
  return (3.0 * coeffs[0] * x + 2.0 * coeffs[1]) * x + coeffs[2];
}

double CubicFamilySpec::curvature_term(double x) const noexcept { return 6.0 * coeffs[0] * x + 2.0 * coeffs[1]; }

void CubicFamilySpec::validate() const {
  if (!(rho >= 1.0)) throw Error("synthetic: rho must be >= 1");
  if (!(max_offset > 0.0)) throw Error("synthetic: max_offset must be > 0");
}

double central_foot_point(const CubicFamilySpec& spec, double px, double py) {
  return foot_point(spec, sampling_for(spec), px, py);
}

double signed_offset(const CubicFamilySpec& spec, double px, double py) {
  const double x = central_foot_point(spec, px, py);
  const double d = spec.slope(x);
  return (-(px - x) * d + (py - spec.y(x))) / std::sqrt(1.0 + d * d);
}

std::array<double, 2> parallel_curve_point(const CubicFamilySpec& spec, double x, double k) {
  const double d = spec.slope(x);
  const double s = std::sqrt(1.0 + d * d);
  return {x - k * d / s, spec.y(x) + k / s};
}

std::pair<VectorField, MaskField> cubic_vector_field(const CubicFamilySpec& spec) {
  spec.validate();
  const Grid& grid = spec.grid;
  const Sampling s = sampling_for(spec);
  VectorField v(grid);
  MaskField mask(grid);
  std::vector<double> keep(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t i) {
    const Vec p = grid.position(i);
    const double x = foot_point(spec, s, p[0], p[1]);
    const double d = spec.slope(x);
    const double norm = std::sqrt(1.0 + d * d);
    const double k = (-(p[0] - x) * d + (p[1] - spec.y(x))) / norm;
    if (std::abs(k) > spec.max_offset) return;
    Vec t = Vec::Zero(grid.dim());
    t[0] = 1.0 / norm;
    t[1] = d / norm;
    v.set(i, t);
    keep[i] = 1.0;
  });
  for (std::size_t i = 0; i < grid.size(); ++i) mask.set(i, keep[i] != 0.0);
  return {std::move(v), std::move(mask)};
}

TensorImage tensors_from_field(const VectorField& v, double rho, const MaskField& mask, AnisotropyReading reading) {
  require_same_grid(v.grid(), mask.grid(), "tensors_from_field");
  if (!(rho >= 1.0)) throw Error("tensors_from_field: rho must be >= 1");
  const int n = v.grid().dim();
  const double across = reading == AnisotropyReading::AxisLength ? 1.0 / (rho * rho) : 1.0 / rho;
  TensorImage out{MetricField::identity(v.grid()), mask};
  const Mat eye = Mat::Identity(n, n);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!mask[i]) continue;
    const Vec d = v.at(i);
    const double len = d.norm();
    if (!(len > 0.0)) throw Error("tensors_from_field: zero vector at masked voxel " + std::to_string(i));
    const Vec u = d / len;
    const Mat p = u * u.transpose();
    out.tensors.set(i, symmetrize(p + across * (eye - p)));
  }
  out.tensors.set_spd_flag(true);
  return out;
}

TensorImage synthesize_subject(const CubicFamilySpec& spec) {
  auto [v, mask] = cubic_vector_field(spec);
  return tensors_from_field(v, spec.rho, mask, spec.reading);
}

Grid default_synthetic_grid(int nodes) {
  const double h = 2.0 / (nodes - 1);
  return Grid::make2d(nodes, nodes, h, h, -1.0, -1.0);
}

std::vector<CubicFamilySpec> default_subject_family(const Grid& grid, double rho, AnisotropyReading reading) {
  const std::array<std::array<double, 4>, 4> coeffs{{
      {1.0, 0.0, 0.0, 0.1},
      {1.0, 0.0, 0.0, -0.1},
      {0.8, 0.0, 0.0, 0.0},
      {1.2, 0.0, 0.0, 0.0},
  }};
  std::vector<CubicFamilySpec> out;
  for (const auto& c : coeffs) {
    CubicFamilySpec s;
    s.coeffs = c;
    s.grid = grid;
    s.rho = rho;
    s.reading = reading;
    out.push_back(s);
  }
  return out;
}

}  // namespace rmatlas
