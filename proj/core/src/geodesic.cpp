#include "rmatlas/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rmatlas/differential.hpp"
#include "rmatlas/error.hpp"
#include "rmatlas/interpolate.hpp"
#include "rmatlas/parallel.hpp"

namespace rmatlas {

namespace {

constexpr long kStepCap = 1000000;

Vec canonical_sign(Vec v) {
  for (int a = 0; a < v.size(); ++a) {
    if (std::abs(v[a]) > 1e-6) return v[a] < 0 ? Vec(-v) : v;
  }
  return v;
}

bool inside(const MaskField& mask, const Vec& p) {
  bool ood = false;
  const bool in = interpolate(mask, p, &ood);
  return in && !ood;
}

double point_segment_distance(const Vec& p, const Vec& a, const Vec& b) {
  const Vec ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double directed_mean(const Curve& from, const Curve& to) {
  std::vector<double> d(from.points.size());
  for (std::size_t i = 0; i < from.points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    if (to.points.size() == 1) best = (from.points[i] - to.points[0]).norm();
    for (std::size_t k = 0; k + 1 < to.points.size(); ++k)
      best = std::min(best, point_segment_distance(from.points[i], to.points[k], to.points[k + 1]));
    d[i] = best;
  }
  return tree_sum(d) / static_cast<double>(d.size());
}

}  // namespace

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::LeftMask:
      return "left-mask";
    case Termination::MaxLength:
      return "max-length";
    case Termination::Completed:
      return "completed";
  }
  return "completed";
}

double Curve::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
  return len;
}

GeodesicShooter::GeodesicShooter(const MetricField& g, const MaskField& mask)
    : g_(g), mask_(mask), gamma_(christoffel_symbols(g, mask)) {}

Vec GeodesicShooter::principal_direction(const Vec& p) const {
  const SymEig e = sym_eig(interpolate(g_, p));
  return canonical_sign(e.vectors.col(0).normalized());
}

Curve GeodesicShooter::shoot(const SeedSpec& seed, double max_len, double dt) const {
  const Grid& grid = g_.grid();
  const int n = grid.dim();
  if (!(dt > 0.0)) throw Error("shoot_geodesic: dt must be > 0");
  if (seed.position.size() != n) throw Error("shoot_geodesic: seed dimension does not match the grid");
  if (!inside(mask_, seed.position)) throw Error("shoot_geodesic: seed outside the mask");
  Vec dir = seed.direction ? *seed.direction : principal_direction(seed.position);
  if (dir.size() != n || dir.norm() == 0.0) throw Error("shoot_geodesic: invalid seed direction");
  const Mat g0 = interpolate(g_, seed.position);
  dir /= std::sqrt(dir.dot(g0 * dir));

  const int pc = packed_size(n);
  std::vector<double> gam(static_cast<std::size_t>(n * pc));
  auto accel = [&](const Vec& x, const Vec& t) {
    interpolate_into(gamma_, sample_weights(grid, x), gam);
    Vec acc = Vec::Zero(n);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc[k] -= gam[k * pc + packed_index(n, i, j)] * t[i] * t[j];
    return acc;
  };

  Curve c;
  c.step = dt;
  c.points.push_back(seed.position);
  c.tangents.push_back(dir);
  Vec x = seed.position;
  Vec t = dir;
  double len = 0.0;
  for (long s = 0; s < kStepCap; ++s) {
    const Vec k1x = t, k1t = accel(x, t);
    const Vec k2x = t + 0.5 * dt * k1t, k2t = accel(x + 0.5 * dt * k1x, k2x);
    const Vec k3x = t + 0.5 * dt * k2t, k3t = accel(x + 0.5 * dt * k2x, k3x);
    const Vec k4x = t + dt * k3t, k4t = accel(x + dt * k3x, k4x);
    const Vec xn = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    t = t + dt / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
    len += (xn - x).norm();
    x = xn;
    c.points.push_back(x);
    c.tangents.push_back(t);
    if (!inside(mask_, x)) {
      c.reason = Termination::LeftMask;
      return c;
    }
    if (len >= max_len) {
      c.reason = Termination::MaxLength;
      return c;
    }
  }
  c.reason = Termination::Completed;
  return c;
}

std::vector<Curve> GeodesicShooter::shoot_all(const std::vector<SeedSpec>& seeds, double max_len, double dt) const {
  std::vector<Curve> out(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { out[i] = shoot(seeds[i], max_len, dt); });
  return out;
}

Curve shoot_geodesic(const MetricField& g, const MaskField& mask, const SeedSpec& seed, double max_len, double dt) {
  require_same_grid(g.grid(), mask.grid(), "shoot_geodesic");
  return GeodesicShooter(g, mask).shoot(seed, max_len, dt);
}

Curve integral_curve(const VectorField& v, const MaskField& mask, const SeedSpec& seed, double max_len, double dt) {
  require_same_grid(v.grid(), mask.grid(), "integral_curve");
  const int n = v.grid().dim();
  if (!(dt > 0.0)) throw Error("integral_curve: dt must be > 0");
  if (seed.position.size() != n) throw Error("integral_curve: seed dimension does not match the grid");
  if (!inside(mask, seed.position)) throw Error("integral_curve: seed outside the mask");
  double sign = 1.0;
  if (seed.direction && interpolate(v, seed.position).dot(*seed.direction) < 0.0) sign = -1.0;
  auto field = [&](const Vec& x) -> Vec { return sign * interpolate(v, x); };

  Curve c;
  c.step = dt;
  c.points.push_back(seed.position);
  Vec x = seed.position;
  double len = 0.0;
  for (long s = 0; s < kStepCap; ++s) {
    const Vec k1 = field(x);
    c.tangents.push_back(k1);
    if (k1.norm() < 1e-12) {
      c.reason = Termination::LeftMask;
      return c;
    }
    const Vec k2 = field(x + 0.5 * dt * k1);
    const Vec k3 = field(x + 0.5 * dt * k2);
    const Vec k4 = field(x + dt * k3);
    const Vec xn = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    len += (xn - x).norm();
    x = xn;
    c.points.push_back(x);
    if (!inside(mask, x)) {
      c.tangents.push_back(field(x));
      c.reason = Termination::LeftMask;
      return c;
    }
    if (len >= max_len) {
      c.tangents.push_back(field(x));
      c.reason = Termination::MaxLength;
      return c;
    }
  }
  c.tangents.push_back(field(x));
  c.reason = Termination::Completed;
  return c;
}

Curve join_curves(const Curve& backward, const Curve& forward) {
  Curve c;
  c.step = forward.step;
  c.reason = forward.reason;
  for (std::size_t i = backward.points.size(); i-- > 1;) {
    c.points.push_back(backward.points[i]);
    c.tangents.push_back(i < backward.tangents.size() ? Vec(-backward.tangents[i]) : Vec());
  }
  c.points.insert(c.points.end(), forward.points.begin(), forward.points.end());
  c.tangents.insert(c.tangents.end(), forward.tangents.begin(), forward.tangents.end());
  return c;
}

double curve_deviation(const Curve& c1, const Curve& c2) {
  if (c1.points.empty() || c2.points.empty()) throw Error("curve_deviation: empty curve");
  return 0.5 * (directed_mean(c1, c2) + directed_mean(c2, c1));
}

}  // namespace rmatlas
