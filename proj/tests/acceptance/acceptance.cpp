// Acceptance suite: one PASS/FAIL line per criterion; exit code 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "rmatlas/atlas.hpp"
#include "rmatlas/conformal.hpp"
#include "rmatlas/diffeomorphism.hpp"
#include "rmatlas/ebin.hpp"
#include "rmatlas/geodesic.hpp"
#include "rmatlas/interpolate.hpp"
#include "rmatlas/registration.hpp"
#include "rmatlas/spd.hpp"
#include "rmatlas/synthetic.hpp"
#include "rmatlas_cli/commands.hpp"
#include "rmatlas_cli/pipeline.hpp"

using namespace rmatlas;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void run(int id, const char* name, const std::function<Outcome()>& fn) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] C%d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Mat random_sym(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Mat s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) s(i, j) = s(j, i) = nd(rng);
  return s;
}

Mat random_spd(std::mt19937_64& rng, int n) { return matrix_function(random_sym(rng, n, 0.7), MatrixFunction::Exp); }

// g1 = g0^{1/2} exp(c I + S0) g0^{1/2} with |S0|_F = aniso.
Mat partner(std::mt19937_64& rng, const Mat& g0, double c, double aniso) {
  const int n = static_cast<int>(g0.rows());
  Mat s = random_sym(rng, n, 1.0);
  s -= (s.trace() / n) * Mat::Identity(n, n);
  s *= aniso / s.norm();
  s += c * Mat::Identity(n, n);
  const Mat r = matrix_function(g0, MatrixFunction::Sqrt);
  return symmetrize(r * matrix_function(s, MatrixFunction::Exp) * r);
}

Grid unit_square(int n) {
  const double h = 1.0 / (n - 1);
  return Grid::make2d(n, n, h, h);
}

MetricField smooth_metric(const Grid& grid, double phase) {
  return MetricField::from_function(grid, [phase](const Vec& p) {
    const double x = p[0], y = p[1];
    Mat s(2, 2);
    s << 0.8 * std::sin(2 * M_PI * x + phase) * std::cos(M_PI * y), 0.5 * std::sin(3 * M_PI * y + x),
        0.5 * std::sin(3 * M_PI * y + x), 0.6 * std::cos(2 * M_PI * (x + y) - phase);
    return matrix_function(s, MatrixFunction::Exp);
  });
}

VectorField bump(const Grid& grid, double ax, double ay) {
  return VectorField::from_function(grid, [ax, ay](const Vec& p) {
    double b = std::sin(M_PI * p[0]) * std::sin(M_PI * p[1]);
    b *= b;
    Vec v(2);
    v << ax * b, ay * b;
    return v;
  });
}

MaskField inner_box(const Grid& grid) {
  return MaskField::from_function(grid, [](const Vec& p) {
    return p[0] > 0.1 && p[0] < 0.9 && p[1] > 0.1 && p[1] < 0.9;
  });
}

double tr_norm2(const Mat& g, const Mat& h) {
  const Mat gi = g.inverse();
  return (gi * h * gi * h).trace() * std::sqrt(g.determinant());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c1_endpoints() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int cases[3] = {0, 0, 0};
  const auto t0 = Clock::now();
  for (int n : {2, 3}) {
    for (int i = 0; i < 1000; ++i) {
      const Mat g0 = random_spd(rng, n);
      const int kind = i % 3;
      const double aniso = kind == 0 ? 0.0 : (kind == 1 ? 0.3 + 0.004 * (i % 500) : 9.0 + 0.01 * (i % 700));
      const Mat g1 = partner(rng, g0, 0.5 * std::sin(i), aniso);
      VoxelGeodesic v(g0, g1);
      cases[v.kappa() < kKappaZero ? 0 : (v.kappa() < M_PI ? 1 : 2)]++;
      worst = std::max(worst, (v.at(1.0) - g1).norm() / g1.norm());
    }
  }
  const double sec = seconds_since(t0);
  const bool all_cases = cases[0] > 0 && cases[1] > 0 && cases[2] > 0;
  std::ostringstream d;
  d << "max rel endpoint error " << worst << " (< 1e-8), cases " << cases[0] << "/" << cases[1] << "/" << cases[2]
    << ", " << sec << " s (< 10 s)";
  return {worst < 1e-8 && all_cases && sec < 10.0, d.str()};
}

Outcome c2_path_energy() {
  std::mt19937_64 rng(102);
  double worst = 0.0;
  int used = 0;
  while (used < 100) {
    const int n = 2 + used % 2;
    const Mat g0 = random_spd(rng, n);
    const Mat g1 = partner(rng, g0, 0.6 * std::cos(used), 0.2 + 0.05 * (used % 40));
    VoxelGeodesic v(g0, g1);
    if (!(v.kappa() > 0.0 && v.kappa() < M_PI)) continue;
    ++used;
    const int steps = 1000;
    const double dt = 1.0 / steps;
    double energy = 0.0;
    Mat prev = v.at(0.0);
    for (int k = 0; k < steps; ++k) {
      const Mat next = v.at((k + 1) * dt);
      energy += tr_norm2(v.at((k + 0.5) * dt), (next - prev) / dt) * dt;
      prev = next;
    }
    const double d2 = v.sq_distance_density();
    worst = std::max(worst, std::abs(energy - d2) / d2);
  }
  return {worst < 5e-3, "max relative |energy - dist^2| over 100 pairs " + fmt("%.3e", worst) + " (< 0.5%)"};
}

Outcome c3_hand_values() {
  Grid grid = Grid::make2d(10, 10, 0.1, 0.1);
  MaskField mask = MaskField::full(grid);
  MetricField i2 = MetricField::identity(grid);
  MetricField four = MetricField::constant(grid, 4.0 * Mat::Identity(2, 2));
  const double d = ebin_distance(i2, four, mask);
  MetricField mid = ebin_geodesic(i2, four, 0.5, mask);
  double mid_err = 0.0;
  for (std::size_t v = 0; v < grid.size(); ++v)
    mid_err = std::max(mid_err, (mid.at(v) - 2.25 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff());
  const double err = std::abs(d - std::sqrt(8.0));
  std::ostringstream s;
  s << "dist = " << fmt("%.15f", d) << " (|err| " << err << "), midpoint max |err| " << mid_err;
  return {err < 1e-10 && mid_err < 1e-10, s.str()};
}

Outcome c4_invariance() {
  auto rel = [](int n) {
    Grid grid = unit_square(n);
    MaskField mask = MaskField::full(grid);
    MetricField g0 = smooth_metric(grid, 0.0), g1 = smooth_metric(grid, 1.3);
    Diffeomorphism phi(bump(grid, 0.08, -0.05));
    const double d = ebin_distance(g0, g1, mask);
    const double dp = ebin_distance(pullback_metric(phi, g0, mask), pullback_metric(phi, g1, mask), mask);
    return std::abs(d - dp) / d;
  };
  const double r64 = rel(64), r128 = rel(128);
  return {r64 < 0.02 && r128 < 0.01 && r128 < r64,
          "relative change " + fmt("%.4f", r64) + " at 64^2 (< 0.02), " + fmt("%.4f", r128) + " at 128^2 (< 0.01)"};
}

Outcome c5_conformal() {
  Grid grid = Grid::make2d(16, 16, 0.1, 0.1);
  TensorImage id{MetricField::identity(grid), MaskField::full(grid)};
  VectorField cv = VectorField::from_function(grid, [](const Vec&) {
    Vec v(2);
    v << 0.8, 0.6;
    return v;
  });
  AlphaReport zr;
  ScalarField zero = solve_alpha(cv, inverse_tensor_metric(id), id.mask, nullptr, {}, &zr);
  double amax = 0.0;
  for (double a : zero.data()) amax = std::max(amax, std::abs(a));

  CubicFamilySpec spec;
  spec.grid = default_synthetic_grid(64);
  const TensorImage d = synthesize_subject(spec);
  AlphaReport rep;
  const ConnectomeMetric cm = build_connectome_metric(d, {}, &rep);
  const PrincipalDirections pd = principal_eigenvector_field(d);
  int better = 0, total = 0;
  for (double x = -0.9; x <= 0.9 + 1e-9; x += 0.05) {
    Vec p(2);
    p << x, spec.y(x);
    if (!interpolate(cm.mask.pruned(), p)) continue;
    const Curve ic = cli::two_way_integral_curve(pd.vectors, cm.mask, p, 4.0, 0.01);
    const Curve ga = cli::two_way_geodesic(cm.g_alpha, cm.mask, p, 4.0, 0.01);
    const Curve gt = cli::two_way_geodesic(cm.g_tilde, cm.mask, p, 4.0, 0.01);
    ++total;
    better += curve_deviation(ga, ic) < curve_deviation(gt, ic);
  }
  const double frac = total ? static_cast<double>(better) / total : 0.0;
  std::ostringstream s;
  s << "constant V: max|alpha| " << amax << ", residual " << zr.relative_residual << "; F " << rep.functional_before
    << " -> " << rep.functional_after << "; g_alpha closer on " << better << "/" << total << " seeds";
  return {amax == 0.0 && zr.relative_residual < 1e-10 && rep.functional_after < rep.functional_before && frac >= 0.9,
          s.str()};
}

Outcome c6_self_recovery() {
  Grid grid = unit_square(64);
  const double h = grid.spacing()[0];
  MaskField mask = inner_box(grid);
  MetricField g0 = smooth_metric(grid, 0.0);
  MetricField g1 = pullback_metric(Diffeomorphism(bump(grid, h, -0.6 * h)), g0);
  RegistrationConfig cfg;
  cfg.lambda = 100.0;
  cfg.max_iter = 400;
  const auto t0 = Clock::now();
  RegistrationResult r = register_metrics(g0, g1, cfg, mask);
  const double sec = seconds_since(t0);
  bool monotone = true;
  double prev = r.report.initial.total;
  for (std::size_t k = 0; k < r.report.size(); ++k) {
    if (r.report.accepted[k] && r.report.total[k] > prev) monotone = false;
    prev = r.report.total[k];
  }
  const double drop = r.report.size() ? 1.0 - r.report.matching.back() / r.report.initial.matching : 0.0;
  const double det = r.phi.min_jacobian_determinant(mask);
  std::ostringstream s;
  s << "matching term drop " << fmt("%.2f%%", 100 * drop) << " in " << r.report.size() << " iterations, monotone "
    << (monotone ? "yes" : "no") << ", min det " << det << ", " << sec << " s";
  return {drop >= 0.9 && monotone && det > 0.0 && sec < 120.0 && r.report.size() <= 400, s.str()};
}

Outcome c7_gradient() {
  Grid grid = unit_square(24);
  const double h = grid.spacing()[0];
  MaskField mask = inner_box(grid);
  MetricField g0 = smooth_metric(grid, 0.0), g1 = smooth_metric(grid, 1.7);
  Diffeomorphism phi(VectorField::from_function(grid, [h](const Vec& p) {
    Vec v(2);
    v << 0.37 * h * std::sin(3 * p[1]), 0.21 * h * std::cos(2 * p[0]);
    return v;
  }));
  VectorField grad = energy_gradient(phi, g0, g1, 100.0, mask);
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng), e = u(rng);
    VectorField du = VectorField::from_function(grid, [=](const Vec& p) {
      Vec v(2);
      v << std::sin(a * p[0] + b) * std::cos(c * p[1]), std::cos(e * p[1] - a) * std::sin(b * p[0] + c);
      return v;
    });
    const double s = 1e-5;
    VectorField up = phi.displacement(), um = phi.displacement();
    double dot = 0.0;
    for (std::size_t i = 0; i < up.data().size(); ++i) {
      up.data()[i] += s * du.data()[i];
      um.data()[i] -= s * du.data()[i];
      dot += grad.data()[i] * du.data()[i];
    }
    const double fd = (matching_energy(Diffeomorphism(up), g0, g1, 100.0, mask).total -
                       matching_energy(Diffeomorphism(um), g0, g1, 100.0, mask).total) /
                      (2 * s);
    worst = std::max(worst, std::abs(fd - dot) / std::abs(fd));
  }
  return {worst < 1e-4, "max relative error over 20 perturbations " + fmt("%.3e", worst) + " (< 1e-4)"};
}

Outcome c8_atlas(const std::string& config, const fs::path& out) {
  const auto t0 = Clock::now();
  cli::AtlasOptions o;
  o.config = config;
  o.out_dir = out.string();
  const json summary = cli::cmd_atlas(o);
  const double sec = seconds_since(t0);
  const json trace = json::parse(slurp(out / "trace.json"));
  const auto obj = trace["objective"].get<std::vector<double>>();
  bool monotone = obj.size() == 400;
  for (std::size_t k = 1; k < obj.size(); ++k) monotone = monotone && obj[k] <= obj[k - 1] * (1 + 1e-6);
  bool aligned = true;
  std::ostringstream s;
  s << "(a) objective " << obj.front() << " -> " << obj.back() << " over " << obj.size() << " iterations, "
    << (monotone ? "non-increasing" : "INCREASES") << "; (b) deviation undeformed -> deformed:";
  for (const auto& d : summary["curve_deviation"]) {
    const double u = d["undeformed"], f = d["deformed"];
    aligned = aligned && f < u;
    s << " " << fmt("%.4f", u) << "->" << fmt("%.4f", f);
  }
  const bool centered = summary["atlas_centroid_inside_hull"].get<bool>();
  s << "; (c) atlas centroid inside envelope: " << (centered ? "yes" : "no") << "; " << fmt("%.1f", sec) << " s";
  return {monotone && aligned && centered && sec < 1800.0, s.str()};
}

Outcome c9_frechet() {
  CubicFamilySpec spec;
  spec.grid = default_synthetic_grid(32);
  const ConnectomeMetric cm = build_connectome_metric(synthesize_subject(spec));
  std::vector<MetricField> copies(5, cm.g_alpha);
  const MetricField m = frechet_mean(copies, cm.mask);
  bool exact = true;
  for (std::size_t i = 0; i < m.data().size(); ++i) exact = exact && m.data()[i] == cm.g_alpha.data()[i];

  std::vector<ConnectomeMetric> subs;
  for (const auto& s : default_subject_family(spec.grid)) subs.push_back(build_connectome_metric(synthesize_subject(s)));
  AtlasConfig cfg;
  cfg.outer_iterations = 3;
  cfg.inner_matching_iterations = 0;
  const AtlasResult r = atlas_build(subs, cfg);
  std::vector<MetricField> gs;
  std::vector<MaskField> masks;
  for (const auto& s : subs) {
    gs.push_back(s.g_alpha);
    masks.push_back(s.mask);
  }
  const MetricField mean = frechet_mean(gs, union_of_warped_masks(masks, r.phis));
  const bool bitwise = mean.data().size() == r.atlas.data().size() &&
                       std::equal(mean.data().begin(), mean.data().end(), r.atlas.data().begin());
  return {exact && bitwise, std::string("mean of identical inputs exact: ") + (exact ? "yes" : "no") +
                                "; 0-inner atlas equals frechet_mean bit-for-bit: " + (bitwise ? "yes" : "no")};
}

json pipeline(const std::string& config, const fs::path& dir) {
  fs::remove_all(dir);
  json all;
  all["synth"] = cli::cmd_synth({config, (dir / "synth").string()});
  cli::EstimateOptions e;
  e.tensor = (dir / "synth" / "subject_0_tensor.mtf").string();
  e.mask = (dir / "synth" / "subject_0_mask.mtf").string();
  e.out_prefix = (dir / "subject_0").string();
  all["estimate"] = cli::cmd_estimate_metric(e);
  cli::AtlasOptions a;
  a.config = config;
  a.out_dir = (dir / "atlas").string();
  all["atlas"] = cli::cmd_atlas(a);
  return all;
}

Outcome c10_determinism(const std::string& config, const fs::path& root) {
  const json a = pipeline(config, root / "run_a");
  const json b = pipeline(config, root / "run_b");
  const bool summaries = a.dump() == b.dump();
  int files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "run_a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), root / "run_a");
    ++files;
    if (slurp(entry.path()) != slurp(root / "run_b" / rel)) ++differing;
  }
  std::ostringstream s;
  s << files << " output files compared, " << differing << " differ; JSON summaries "
    << (summaries ? "identical" : "DIFFER");
  return {summaries && differing == 0 && files > 0, s.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string config = argc > 1 ? argv[1] : RMATLAS_PAPER_CONFIG;
  const fs::path scratch = fs::temp_directory_path() / "rmatlas_acceptance";
  fs::create_directories(scratch);

  run(1, "Ebin geodesic endpoint", c1_endpoints);
  run(2, "distance-energy consistency", c2_path_energy);
  run(3, "hand values dist(I, 4I) and midpoint", c3_hand_values);
  run(4, "diffeomorphism invariance", c4_invariance);
  run(5, "conformal estimation", c5_conformal);
  run(6, "registration self-recovery", c6_self_recovery);
  run(7, "gradient correctness", c7_gradient);
  run(8, "atlas on synthetic cubic metrics", [&] { return c8_atlas(config, scratch / "atlas"); });
  run(9, "Frechet trivialities", c9_frechet);
  run(10, "I/O determinism", [&] { return c10_determinism(config, scratch); });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
