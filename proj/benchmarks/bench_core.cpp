#include <benchmark/benchmark.h>

#include <cmath>

#include "rmatlas/conformal.hpp"
#include "rmatlas/ebin.hpp"
#include "rmatlas/geodesic.hpp"
#include "rmatlas/poisson.hpp"
#include "rmatlas/registration.hpp"
#include "rmatlas/spd.hpp"
#include "rmatlas/synthetic.hpp"

using namespace rmatlas;

namespace {

Grid square(int n) {
  const double h = 1.0 / (n - 1);
  return Grid::make2d(n, n, h, h);
}

MetricField wavy(const Grid& grid, double phase) {
  return MetricField::from_function(grid, [phase](const Vec& p) {
    Mat s(2, 2);
    s << 0.8 * std::sin(2 * M_PI * p[0] + phase), 0.4 * std::cos(3 * p[1]), 0.4 * std::cos(3 * p[1]),
        0.6 * std::cos(2 * M_PI * (p[0] + p[1]) - phase);
    return matrix_function(s, MatrixFunction::Exp);
  });
}

MaskField interior(const Grid& grid) {
  return MaskField::from_function(grid, [](const Vec& p) {
    return p[0] > 0.1 && p[0] < 0.9 && p[1] > 0.1 && p[1] < 0.9;
  });
}

}  // namespace

static void BM_EbinDistance(benchmark::State& state) {
  Grid grid = square(static_cast<int>(state.range(0)));
  MetricField a = wavy(grid, 0.0), b = wavy(grid, 1.0);
  MaskField mask = MaskField::full(grid);
  for (auto _ : state) benchmark::DoNotOptimize(ebin_distance(a, b, mask));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.size()));
}
BENCHMARK(BM_EbinDistance)->Arg(64)->Arg(128);

static void BM_FrechetMean4(benchmark::State& state) {
  Grid grid = square(static_cast<int>(state.range(0)));
  std::vector<MetricField> in{wavy(grid, 0.0), wavy(grid, 0.5), wavy(grid, 1.0), wavy(grid, 1.5)};
  MaskField mask = MaskField::full(grid);
  for (auto _ : state) benchmark::DoNotOptimize(frechet_mean(in, mask));
}
BENCHMARK(BM_FrechetMean4)->Arg(64);

static void BM_EnergyGradient(benchmark::State& state) {
  Grid grid = square(static_cast<int>(state.range(0)));
  MetricField a = wavy(grid, 0.0), b = wavy(grid, 1.0);
  MatchingProblem prob(a, b, 100.0, interior(grid));
  Diffeomorphism id(grid);
  for (auto _ : state) benchmark::DoNotOptimize(prob.gradient(id));
}
BENCHMARK(BM_EnergyGradient)->Arg(64)->Arg(128);

static void BM_PoissonSmooth(benchmark::State& state) {
  Grid grid = square(static_cast<int>(state.range(0)));
  VectorField f = VectorField::from_function(grid, [](const Vec& p) {
    Vec v(2);
    v << std::sin(7 * p[0]) * p[1], std::cos(5 * p[1]);
    return v;
  });
  for (auto _ : state) benchmark::DoNotOptimize(information_metric_smooth(f));
}
BENCHMARK(BM_PoissonSmooth)->Arg(64)->Arg(128);

static void BM_ConnectomeMetric(benchmark::State& state) {
  CubicFamilySpec spec;
  spec.grid = default_synthetic_grid(static_cast<int>(state.range(0)));
  TensorImage d = synthesize_subject(spec);
  for (auto _ : state) benchmark::DoNotOptimize(build_connectome_metric(d));
}
BENCHMARK(BM_ConnectomeMetric)->Arg(64);

static void BM_ShootGeodesic(benchmark::State& state) {
  CubicFamilySpec spec;
  spec.grid = default_synthetic_grid(64);
  ConnectomeMetric cm = build_connectome_metric(synthesize_subject(spec));
  GeodesicShooter shooter(cm.g_alpha, cm.mask);
  Vec seed = Vec::Zero(2);
  for (auto _ : state) benchmark::DoNotOptimize(shooter.shoot({seed, std::nullopt}, 4.0, 0.01));
}
BENCHMARK(BM_ShootGeodesic);

BENCHMARK_MAIN();
