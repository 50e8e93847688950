#include "rmatlas_cli/pipeline.hpp"

#include <algorithm>

#include "rmatlas/error.hpp"
#include "rmatlas/interpolate.hpp"

namespace rmatlas::cli {

Curve two_way_geodesic(const MetricField& g, const MaskField& mask, const Vec& seed, double max_len, double dt) {
  const MaskField m = mask.pruned();
  const GeodesicShooter shooter(g, m);
  const Vec d = shooter.principal_direction(seed);
  return join_curves(shooter.shoot({seed, Vec(-d)}, max_len, dt), shooter.shoot({seed, d}, max_len, dt));
}

Curve two_way_integral_curve(const VectorField& v, const MaskField& mask, const Vec& seed, double max_len, double dt) {
  const Vec d = interpolate(v, seed);
  return join_curves(integral_curve(v, mask, {seed, Vec(-d)}, max_len, dt), integral_curve(v, mask, {seed, d}, max_len, dt));
}

GeodesicComparison compare_atlas_geodesics(const std::vector<ConnectomeMetric>& subjects, const AtlasResult& atlas,
                                           const MetricField& atlas_metric, const Vec& seed, double max_len,
                                           double dt) {
  GeodesicComparison out;
  out.atlas = two_way_geodesic(atlas_metric, atlas.union_mask, seed, max_len, dt);
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const ConnectomeMetric& s = subjects[i];
    out.undeformed.push_back(two_way_geodesic(s.g_alpha, s.mask, seed, max_len, dt));
    const MaskField warped = warp_mask(s.mask, atlas.phis[i]);
    const MetricField pulled = pullback_metric(atlas.phis[i], s.g_alpha, warped);
    out.deformed.push_back(two_way_geodesic(pulled, warped, seed, max_len, dt));
    out.deviation_undeformed.push_back(curve_deviation(out.atlas, out.undeformed.back()));
    out.deviation_deformed.push_back(curve_deviation(out.atlas, out.deformed.back()));
  }
  return out;
}

bool centroid_inside_hull(const Curve& inner, const std::vector<Curve>& outer) {
  if (inner.points.empty()) throw Error("centroid_inside_hull: empty curve");
  Vec c = Vec::Zero(2);
  for (const Vec& p : inner.points) c += p.head(2);
  c /= static_cast<double>(inner.points.size());

  // Andrew's monotone chain.
  std::vector<std::pair<double, double>> pts;
  for (const Curve& cv : outer)
    for (const Vec& p : cv.points) pts.emplace_back(p[0], p[1]);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return false;
  auto cross = [](const auto& o, const auto& a, const auto& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<double, double>> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  const std::pair<double, double> q{c[0], c[1]};
  for (std::size_t i = 0; i < hull.size(); ++i)
    if (cross(hull[i], hull[(i + 1) % hull.size()], q) < 0) return false;
  return true;
}

}  // namespace rmatlas::cli
