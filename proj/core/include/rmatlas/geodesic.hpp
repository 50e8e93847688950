#pragma once

#include <optional>
#include <vector>

#include "rmatlas/fields.hpp"

namespace rmatlas {

enum class Termination { LeftMask, MaxLength, Completed };

const char* to_string(Termination t) noexcept;

struct Curve {
  std::vector<Vec> points;
  /// Velocity at each point (dgamma/dt).
  std::vector<Vec> tangents;
  double step = 0.0;
  Termination reason = Termination::Completed;

  /// Euclidean polyline length.
  double length() const;
};

struct SeedSpec {
  Vec position;
  /// Initial direction; empty selects the principal direction at the seed
  /// (the fastest direction of the metric, or V itself for integral curves).
  std::optional<Vec> direction;
};

/// Geodesic tracer holding the Christoffel symbols of one metric.
class GeodesicShooter {
 public:
  GeodesicShooter(const MetricField& g, const MaskField& mask);

  /// RK4 on gamma'' = -Gamma(gamma', gamma') with |gamma'(0)|_g = 1. Stops on
  /// leaving the mask or the lattice (the exit point is kept), after a
  /// Euclidean length of max_len, or after an internal step cap.
  /// Throws Error when the seed is outside the mask or dt <= 0.
  Curve shoot(const SeedSpec& seed, double max_len, double dt) const;
  std::vector<Curve> shoot_all(const std::vector<SeedSpec>& seeds, double max_len, double dt) const;

  /// Eigenvector of the smallest metric eigenvalue at p (first significant component positive).
  Vec principal_direction(const Vec& p) const;

 private:
  const MetricField& g_;
  const MaskField& mask_;
  ChristoffelField gamma_;
};

Curve shoot_geodesic(const MetricField& g, const MaskField& mask, const SeedSpec& seed, double max_len, double dt);

/// RK4 on gamma' = V(gamma). A seed direction only selects the orientation:
/// V is negated when it points against the requested direction. Zero vectors
/// end the curve with Termination::LeftMask.
Curve integral_curve(const VectorField& v, const MaskField& mask, const SeedSpec& seed, double max_len, double dt);

/// Concatenates a backward trace (reversed) and a forward trace that share their first point.
Curve join_curves(const Curve& backward, const Curve& forward);

/// Symmetric mean closest-point distance between two polylines.
double curve_deviation(const Curve& c1, const Curve& c2);

}  // namespace rmatlas
