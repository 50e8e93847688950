#include "rmatlas_cli/render.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "rmatlas/error.hpp"

namespace rmatlas::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_svg(const MetricField* tensors, const MaskField& mask, const std::vector<CurveStyle>& curves,
                       const RenderOptions& options) {
  const Grid& grid = mask.grid();
  if (grid.dim() != 2) throw Error("render: only 2D fields can be drawn");
  const double hx = grid.spacing()[0], hy = grid.spacing()[1];
  const double x0 = grid.origin()[0] - 0.5 * hx, y0 = grid.origin()[1] - 0.5 * hy;
  const double w = grid.shape()[0] * hx, h = grid.shape()[1] * hy;
  const double scale = options.pixels / std::max(w, h);
  const double margin = 10.0;
  const double width = w * scale + 2 * margin, height = h * scale + 2 * margin + (options.title.empty() ? 0 : 20);
  const double top = options.title.empty() ? margin : margin + 20;
  auto px = [&](double x) { return margin + (x - x0) * scale; };
  auto py = [&](double y) { return top + (h - (y - y0)) * scale; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
    << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty())
    s << "<text x=\"" << num(margin) << "\" y=\"" << num(margin + 12) << "\" font-family=\"sans-serif\" font-size=\"14\">"
      << options.title << "</text>\n";

  // mask outline: lattice-cell edges between set and unset voxels
  s << "<g stroke=\"#444\" stroke-width=\"1\">\n";
  for (int j = 0; j < grid.shape()[1]; ++j) {
    for (int i = 0; i < grid.shape()[0]; ++i) {
      if (!mask.at({i, j, 0})) continue;
      const double cx = grid.origin()[0] + i * hx, cy = grid.origin()[1] + j * hy;
      const double l = px(cx - 0.5 * hx), r = px(cx + 0.5 * hx), b = py(cy - 0.5 * hy), t = py(cy + 0.5 * hy);
      auto edge = [&](double xa, double ya, double xb, double yb) {
        s << "<line x1=\"" << num(xa) << "\" y1=\"" << num(ya) << "\" x2=\"" << num(xb) << "\" y2=\"" << num(yb)
          << "\"/>\n";
      };
      if (!mask.at({i - 1, j, 0})) edge(l, b, l, t);
      if (!mask.at({i + 1, j, 0})) edge(r, b, r, t);
      if (!mask.at({i, j - 1, 0})) edge(l, b, r, b);
      if (!mask.at({i, j + 1, 0})) edge(l, t, r, t);
    }
  }
  s << "</g>\n";

  if (tensors) {
    require_same_grid(tensors->grid(), grid, "render");
    const int stride = std::max(1, options.glyph_stride);
    double largest = 0.0;
    for (std::size_t v = 0; v < grid.size(); ++v)
      if (mask[v]) largest = std::max(largest, sym_eig(tensors->at(v)).values.maxCoeff());
    const double radius = 0.45 * stride * std::min(hx, hy) * scale;
    s << "<g fill=\"#9ecae1\" fill-opacity=\"0.6\" stroke=\"#3182bd\" stroke-width=\"0.5\">\n";
    for (int j = 0; j < grid.shape()[1]; j += stride) {
      for (int i = 0; i < grid.shape()[0]; i += stride) {
        const std::size_t v = grid.index({i, j, 0});
        if (!mask[v] || !(largest > 0.0)) continue;
        const SymEig e = sym_eig(tensors->at(v));
        const double major = radius * std::sqrt(std::max(0.0, e.values[1]) / largest);
        const double minor = radius * std::sqrt(std::max(0.0, e.values[0]) / largest);
        const double angle = -std::atan2(e.vectors(1, 1), e.vectors(0, 1)) * 180.0 / std::numbers::pi;
        const Vec c = grid.position(v);
        s << "<ellipse cx=\"" << num(px(c[0])) << "\" cy=\"" << num(py(c[1])) << "\" rx=\"" << num(major)
          << "\" ry=\"" << num(minor) << "\" transform=\"rotate(" << num(angle) << ' ' << num(px(c[0])) << ' '
          << num(py(c[1])) << ")\"/>\n";
      }
    }
    s << "</g>\n";
  }

  double legend_y = top + 14;
  for (const auto& cs : curves) {
    if (!cs.curve || cs.curve->points.empty()) continue;
    s << "<polyline fill=\"none\" stroke=\"" << cs.color << "\" stroke-width=\"" << num(cs.width) << "\" points=\"";
    for (const Vec& p : cs.curve->points) s << num(px(p[0])) << ',' << num(py(p[1])) << ' ';
    s << "\"/>\n";
    if (!cs.label.empty()) {
      s << "<text x=\"" << num(width - margin - 150) << "\" y=\"" << num(legend_y)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << cs.color << "\">" << cs.label << "</text>\n";
      legend_y += 14;
    }
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace rmatlas::cli
