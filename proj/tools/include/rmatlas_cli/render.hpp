#pragma once

#include <string>
#include <vector>

#include "rmatlas/fields.hpp"
#include "rmatlas/geodesic.hpp"

namespace rmatlas::cli {

struct CurveStyle {
  const Curve* curve;
  std::string color;
  std::string label;
  double width = 1.5;
};

struct RenderOptions {
  int pixels = 640;
  int glyph_stride = 2;
  std::string title;
};

/// SVG with one ellipse glyph per `glyph_stride` masked voxels (axes along
/// the eigenvectors of `tensors`, lengths proportional to the square roots of
/// the eigenvalues), the mask outline and the curves. 2D grids only.
std::string render_svg(const MetricField* tensors, const MaskField& mask, const std::vector<CurveStyle>& curves,
                       const RenderOptions& options = {});

}  // namespace rmatlas::cli
