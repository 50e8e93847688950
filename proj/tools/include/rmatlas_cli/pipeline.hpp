#pragma once

#include <vector>

#include "rmatlas/atlas.hpp"
#include "rmatlas/geodesic.hpp"

namespace rmatlas::cli {

/// Geodesic through the seed, traced both ways along the fastest direction of g.
/// The mask is pruned first so derivative stencils exist everywhere on it.
Curve two_way_geodesic(const MetricField& g, const MaskField& mask, const Vec& seed, double max_len, double dt);

/// Integral curve of v through the seed, traced both ways.
Curve two_way_integral_curve(const VectorField& v, const MaskField& mask, const Vec& seed, double max_len, double dt);

/// Atlas geodesic against each subject's geodesic before and after mapping
/// the subject into atlas space (phi_i^* g_i on the warped mask).
struct GeodesicComparison {
  Curve atlas;
  std::vector<Curve> undeformed;
  std::vector<Curve> deformed;
  std::vector<double> deviation_undeformed;
  std::vector<double> deviation_deformed;
};

GeodesicComparison compare_atlas_geodesics(const std::vector<ConnectomeMetric>& subjects, const AtlasResult& atlas,
                                           const MetricField& atlas_metric, const Vec& seed, double max_len,
                                           double dt);

/// True when the mean of `inner` lies in the convex hull of the union of the
/// points of `outer` (2D).
bool centroid_inside_hull(const Curve& inner, const std::vector<Curve>& outer);

}  // namespace rmatlas::cli
