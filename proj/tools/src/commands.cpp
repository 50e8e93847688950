#include "rmatlas_cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rmatlas/atlas.hpp"
#include "rmatlas/conformal.hpp"
#include "rmatlas/ebin.hpp"
#include "rmatlas/error.hpp"
#include "rmatlas/interpolate.hpp"
#include "rmatlas/mtf.hpp"
#include "rmatlas/spd.hpp"
#include "rmatlas/synthetic.hpp"
#include "rmatlas_cli/config.hpp"
#include "rmatlas_cli/pipeline.hpp"
#include "rmatlas_cli/render.hpp"

namespace rmatlas::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json grid_json(const Grid& g) {
  const int n = g.dim();
  return {{"dim", n},
          {"shape", std::vector<int>(g.shape().begin(), g.shape().begin() + n)},
          {"spacing", std::vector<double>(g.spacing().begin(), g.spacing().begin() + n)},
          {"origin", std::vector<double>(g.origin().begin(), g.origin().begin() + n)}};
}

json energy_json(const EnergyTerms& e) {
  return {{"total", e.total}, {"deformation", e.deformation}, {"matching", e.matching}};
}

MaskField mask_or_full(const std::string& path, const Grid& grid) {
  if (path.empty()) return MaskField::full(grid);
  MaskField m = read_mask(path);
  require_same_grid(grid, m.grid(), "mask");
  return m;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir + ": " + ec.message());
}

std::vector<ConnectomeMetric> synthetic_subjects(const PipelineConfig& cfg) {
  AlphaSolveSettings s;
  s.tolerance = cfg.solver_tolerance;
  std::vector<ConnectomeMetric> out;
  for (const auto& spec : cfg.subject_specs()) out.push_back(build_connectome_metric(synthesize_subject(spec), s));
  return out;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out << text;
    if (!out) throw Error("write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

json curve_to_json(const Curve& c) {
  json pts = json::array();
  for (const Vec& p : c.points) pts.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  return {{"points", pts}, {"step", c.step}, {"reason", to_string(c.reason)}, {"length", c.length()}};
}

Curve curve_from_json(const json& j) {
  Curve c;
  try {
    for (const auto& p : j.at("points")) {
      const auto v = p.get<std::vector<double>>();
      Vec q(static_cast<Eigen::Index>(v.size()));
      for (std::size_t i = 0; i < v.size(); ++i) q[static_cast<Eigen::Index>(i)] = v[i];
      c.points.push_back(q);
    }
    if (j.contains("step")) c.step = j.at("step").get<double>();
    if (j.contains("reason")) {
      const auto r = j.at("reason").get<std::string>();
      if (r == "left-mask") c.reason = Termination::LeftMask;
      else if (r == "max-length") c.reason = Termination::MaxLength;
      else if (r == "completed") c.reason = Termination::Completed;
      else throw Error("malformed curve file: unknown reason '" + r + "'");
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed curve file: ") + e.what());
  }
  return c;
}

Vec parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("malformed coordinate list '" + text + "'");
    }
  }
  if (v.size() < 2 || v.size() > 3) throw Error("expected 2 or 3 comma-separated coordinates, got '" + text + "'");
  Vec p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<Eigen::Index>(i)] = v[i];
  return p;
}

json cmd_synth(const SynthOptions& o) {
  const PipelineConfig cfg = o.config.empty() ? parse_config(json::object()) : load_config(o.config);
  const std::string dir = o.out_dir.empty() ? cfg.output_directory : o.out_dir;
  ensure_dir(dir);
  json subjects = json::array();
  const auto specs = cfg.subject_specs();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto [v, mask] = cubic_vector_field(specs[i]);
    const TensorImage d = tensors_from_field(v, specs[i].rho, mask, specs[i].reading);
    const std::string stem = "subject_" + std::to_string(i);
    write_mtf(join(dir, stem + "_tensor.mtf"), d.tensors, FieldKind::Tensor);
    write_mtf(join(dir, stem + "_mask.mtf"), mask);
    write_mtf(join(dir, stem + "_vector.mtf"), v);
    subjects.push_back({{"index", i},
                        {"coefficients", specs[i].coeffs},
                        {"mask_voxels", mask.count()},
                        {"tensor", stem + "_tensor.mtf"},
                        {"mask", stem + "_mask.mtf"},
                        {"vector", stem + "_vector.mtf"}});
  }
  return {{"grid", grid_json(specs.front().grid)}, {"subjects", subjects}};
}

json cmd_estimate_metric(const EstimateOptions& o) {
  TensorImage d{read_metric(o.tensor), MaskField()};
  d.mask = mask_or_full(o.mask, d.tensors.grid());
  AlphaSolveSettings s;
  s.tolerance = o.tolerance;
  AlphaReport rep;
  const ConnectomeMetric cm = build_connectome_metric(d, s, &rep);
  const std::string prefix = o.out_prefix.empty() ? "connectome" : o.out_prefix;
  write_mtf(prefix + "_g_alpha.mtf", cm.g_alpha);
  write_mtf(prefix + "_g_tilde.mtf", cm.g_tilde);
  write_mtf(prefix + "_alpha.mtf", cm.alpha);
  return {{"iterations", rep.iterations},
          {"relative_residual", rep.relative_residual},
          {"functional_before", rep.functional_before},
          {"functional_after", rep.functional_after},
          {"outputs",
           {fs::path(prefix + "_g_alpha.mtf").filename().string(), fs::path(prefix + "_g_tilde.mtf").filename().string(),
            fs::path(prefix + "_alpha.mtf").filename().string()}}};
}

namespace {

json finish_curve(const Curve& c, const std::string& out) {
  json j = curve_to_json(c);
  if (!out.empty()) write_text_atomic(out, j.dump(2) + "\n");
  json summary = {{"points", c.points.size()}, {"length", c.length()}, {"reason", to_string(c.reason)}};
  summary["start"] = std::vector<double>(c.points.front().data(), c.points.front().data() + c.points.front().size());
  summary["end"] = std::vector<double>(c.points.back().data(), c.points.back().data() + c.points.back().size());
  return summary;
}

}  // namespace

json cmd_geodesic(const CurveOptions& o) {
  const MetricField g = read_metric(o.field);
  const MaskField mask = mask_or_full(o.mask, g.grid());
  const Vec seed = parse_point(o.seed);
  if (o.both_ways) return finish_curve(two_way_geodesic(g, mask, seed, o.max_length, o.dt), o.out);
  SeedSpec s{seed, std::nullopt};
  if (!o.direction.empty()) s.direction = parse_point(o.direction);
  return finish_curve(shoot_geodesic(g, mask.pruned(), s, o.max_length, o.dt), o.out);
}

json cmd_integral_curve(const CurveOptions& o) {
  const VectorField v = read_vector(o.field);
  const MaskField mask = mask_or_full(o.mask, v.grid());
  const Vec seed = parse_point(o.seed);
  if (o.both_ways) return finish_curve(two_way_integral_curve(v, mask, seed, o.max_length, o.dt), o.out);
  SeedSpec s{seed, std::nullopt};
  if (!o.direction.empty()) s.direction = parse_point(o.direction);
  return finish_curve(integral_curve(v, mask, s, o.max_length, o.dt), o.out);
}

json cmd_distance(const DistanceOptions& o) {
  const MetricField a = read_metric(o.a);
  const MetricField b = read_metric(o.b);
  require_same_grid(a.grid(), b.grid(), "distance");
  const MaskField mask = mask_or_full(o.mask, a.grid());
  require_spd(a, mask, "distance: first metric");
  require_spd(b, mask, "distance: second metric");
  return {{"dist", ebin_distance(a, b, mask)}};
}

json cmd_mean(const MeanOptions& o) {
  if (o.inputs.empty()) throw Error("mean: no input metrics");
  std::vector<std::string> inputs = o.inputs;
  std::sort(inputs.begin(), inputs.end());
  std::vector<MetricField> metrics;
  for (const auto& p : inputs) metrics.push_back(read_metric(p));
  const MaskField mask = mask_or_full(o.mask, metrics.front().grid());
  const MetricField mean = frechet_mean(metrics, mask);
  write_mtf(o.out, mean);
  json names = json::array();
  for (const auto& p : inputs) names.push_back(fs::path(p).filename().string());
  return {{"inputs", names}, {"mask_voxels", mask.count()}, {"output", fs::path(o.out).filename().string()}};
}

json cmd_register(const RegisterOptions& o) {
  const PipelineConfig cfg = o.config.empty() ? parse_config(json::object()) : load_config(o.config);
  RegistrationConfig rc = cfg.registration;
  if (o.max_iter) rc.max_iter = *o.max_iter;
  const MetricField g0 = read_metric(o.fixed);
  const MetricField g1 = read_metric(o.moving);
  require_same_grid(g0.grid(), g1.grid(), "register");
  const MaskField mask = mask_or_full(o.mask, g0.grid());
  if (!all_spd(g0, mask, cfg.eps_pd) || !all_spd(g1, mask, cfg.eps_pd))
    throw Error("register: input metrics are not positive-definite on the mask");
  const RegistrationResult r = register_metrics(g0, g1, rc, mask);
  write_mtf(o.out, r.phi.displacement(), FieldKind::Displacement);
  const EnergyTerms final_terms =
      r.report.size() ? EnergyTerms{r.report.deformation.back(), r.report.matching.back(), r.report.total.back()}
                      : r.report.initial;
  json accepted = json::array();
  for (bool b : r.report.accepted) accepted.push_back(b);
  return {{"iterations", r.report.size()},
          {"initial", energy_json(r.report.initial)},
          {"final", energy_json(final_terms)},
          {"min_jacobian_determinant", r.phi.min_jacobian_determinant(mask)},
          {"trace",
           {{"total", r.report.total},
            {"deformation", r.report.deformation},
            {"matching", r.report.matching},
            {"epsilon", r.report.epsilon},
            {"accepted", accepted}}},
          {"output", fs::path(o.out).filename().string()}};
}

json cmd_atlas(const AtlasOptions& o) {
  const PipelineConfig cfg = o.config.empty() ? parse_config(json::object()) : load_config(o.config);
  AtlasConfig ac = cfg.atlas_config();
  if (o.outer_iterations) ac.outer_iterations = *o.outer_iterations;
  const std::string dir = o.out_dir.empty() ? cfg.output_directory : o.out_dir;
  ensure_dir(dir);

  std::vector<ConnectomeMetric> subjects;
  if (o.metrics.empty()) {
    subjects = synthetic_subjects(cfg);
  } else {
    if (o.metrics.size() != o.masks.size()) throw Error("atlas: need one --mask per --metric");
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < o.metrics.size(); ++i) pairs.emplace_back(o.metrics[i], o.masks[i]);
    std::sort(pairs.begin(), pairs.end());
    for (const auto& [m, k] : pairs) {
      ConnectomeMetric cm;
      cm.g_alpha = read_metric(m);
      cm.mask = read_mask(k);
      require_same_grid(cm.g_alpha.grid(), cm.mask.grid(), "atlas input");
      if (!all_spd(cm.g_alpha, cm.mask, cfg.eps_pd)) throw Error("atlas: " + m + " is not positive-definite on its mask");
      subjects.push_back(std::move(cm));
    }
  }

  const AtlasResult r = atlas_build(subjects, ac);
  AlphaSolveSettings s;
  s.tolerance = cfg.solver_tolerance;
  const ConnectomeMetric fin = finalize_atlas_alpha(r.atlas, r.union_mask, s);

  write_mtf(join(dir, "atlas.mtf"), r.atlas);
  write_mtf(join(dir, "atlas_alpha.mtf"), fin.g_alpha);
  write_mtf(join(dir, "union_mask.mtf"), r.union_mask);
  json phis = json::array();
  for (std::size_t i = 0; i < r.phis.size(); ++i) {
    const std::string name = "phi_" + std::to_string(i) + ".mtf";
    write_mtf(join(dir, name), r.phis[i].displacement(), FieldKind::Displacement);
    phis.push_back(name);
  }
  json skipped = json::array();
  for (const auto& row : r.skipped) {
    int count = 0;
    for (bool b : row) count += b;
    skipped.push_back(count);
  }
  write_text_atomic(join(dir, "trace.json"), json({{"objective", r.trace}, {"skipped_subjects", skipped}}).dump(2) + "\n");

  json summary = {{"subjects", subjects.size()},
                  {"outer_iterations", ac.outer_iterations},
                  {"inner_matching_iterations", ac.inner_matching_iterations},
                  {"initial_objective", r.trace.empty() ? 0.0 : r.trace.front()},
                  {"final_objective", r.trace.empty() ? 0.0 : r.trace.back()},
                  {"union_mask_voxels", r.union_mask.count()}};

  json outputs = {{"atlas", "atlas.mtf"},
                  {"atlas_alpha", "atlas_alpha.mtf"},
                  {"union_mask", "union_mask.mtf"},
                  {"phis", phis},
                  {"trace", "trace.json"}};

  if (r.atlas.grid().dim() == 2) {
    Vec seed(2);
    seed << cfg.geodesic.seed[0], cfg.geodesic.seed[1];
    const GeodesicComparison cmp =
        compare_atlas_geodesics(subjects, r, fin.g_alpha, seed, cfg.geodesic.max_length, cfg.geodesic.dt);
    json dev = json::array();
    for (std::size_t i = 0; i < subjects.size(); ++i)
      dev.push_back({{"undeformed", cmp.deviation_undeformed[i]}, {"deformed", cmp.deviation_deformed[i]}});
    summary["curve_deviation"] = dev;
    summary["atlas_centroid_inside_hull"] = centroid_inside_hull(cmp.atlas, cmp.undeformed);

    std::vector<CurveStyle> styles;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
      styles.push_back({&cmp.undeformed[i], "#bdbdbd", i == 0 ? "subject geodesics" : "", 1.0});
      styles.push_back({&cmp.deformed[i], "#fd8d3c", i == 0 ? "deformed subject geodesics" : "", 1.0});
    }
    styles.push_back({&cmp.atlas, "#d7301f", "atlas geodesic", 2.0});
    MetricField tensors = MetricField::identity(r.atlas.grid());
    for (std::size_t v = 0; v < tensors.size(); ++v)
      if (r.union_mask[v]) tensors.set(v, matrix_function(fin.g_alpha.at(v), MatrixFunction::Inverse));
    RenderOptions ro;
    ro.title = "atlas";
    write_text_atomic(join(dir, "atlas.svg"), render_svg(&tensors, r.union_mask, styles, ro));
    outputs["figure"] = "atlas.svg";
  }
  summary["outputs"] = outputs;
  return summary;
}

json cmd_info(const std::string& path) {
  const MtfData d = read_mtf(path);
  json j;
  j["kind"] = to_string(d.kind);
  std::visit(
      [&](const auto& f) {
        j["grid"] = grid_json(f.grid());
        if constexpr (std::is_same_v<std::decay_t<decltype(f)>, MaskField>) {
          j["components"] = 1;
          j["mask_voxels"] = f.count();
        } else {
          j["components"] = f.components();
          const auto data = f.data();
          double lo = data.empty() ? 0.0 : data[0], hi = lo, sum = 0.0;
          for (double x : data) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            sum += x;
          }
          j["stats"] = {{"min", lo}, {"max", hi}, {"mean", data.empty() ? 0.0 : sum / data.size()}};
        }
      },
      d.field);
  return j;
}

json cmd_render(const RenderCmdOptions& o) {
  const MaskField mask = read_mask(o.mask);
  std::optional<MetricField> tensors;
  if (!o.tensor.empty()) {
    tensors = read_metric(o.tensor);
  } else if (!o.metric.empty()) {
    const MetricField g = read_metric(o.metric);
    require_spd(g, mask, "render: metric");
    tensors = MetricField::identity(g.grid());
    for (std::size_t v = 0; v < g.size(); ++v)
      if (mask[v]) tensors->set(v, matrix_function(g.at(v), MatrixFunction::Inverse));
  }
  std::vector<Curve> curves;
  for (const auto& p : o.curves) {
    std::ifstream in(p);
    if (!in) throw Error("cannot open curve file " + p);
    try {
      curves.push_back(curve_from_json(json::parse(in)));
    } catch (const json::exception& e) {
      throw Error("curve file " + p + ": " + e.what());
    }
  }
  static const char* palette[] = {"#d7301f", "#2171b5", "#238b45", "#6a51a3", "#fd8d3c", "#636363"};
  std::vector<CurveStyle> styles;
  for (std::size_t i = 0; i < curves.size(); ++i)
    styles.push_back({&curves[i], palette[i % 6], fs::path(o.curves[i]).stem().string(), 1.5});
  RenderOptions ro;
  ro.title = o.title;
  write_text_atomic(o.out, render_svg(tensors ? &*tensors : nullptr, mask, styles, ro));
  return {{"output", fs::path(o.out).filename().string()}, {"curves", curves.size()}, {"glyphs", tensors.has_value()}};
}

}  // namespace rmatlas::cli
