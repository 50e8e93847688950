#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rmatlas/differential.hpp"
#include "rmatlas/error.hpp"
#include "rmatlas/interpolate.hpp"
#include "rmatlas/parallel.hpp"
#include "rmatlas/poisson.hpp"
#include "rmatlas/registration.hpp"
#include "rmatlas/spd.hpp"
#include "test_util.hpp"

using namespace rmatlas;

TEST(Grid, IndexingIsXFastest) {
  Grid g(3, {4, 5, 6}, {1, 1, 1});
  EXPECT_EQ(g.index({1, 0, 0}), 1u);
  EXPECT_EQ(g.index({0, 1, 0}), 4u);
  EXPECT_EQ(g.index({0, 0, 1}), 20u);
  EXPECT_EQ(g.coords(g.index({3, 2, 5})), (Index3{3, 2, 5}));
  EXPECT_THROW(Grid(4, {3, 3, 3}, {1, 1, 1}), Error);
  EXPECT_THROW(Grid(2, {3, 2, 1}, {1, 1, 1}), Error);
  EXPECT_THROW(Grid(2, {3, 3, 1}, {0, 1, 1}), Error);
}

TEST(Packed, ComponentOrder) {
  EXPECT_EQ(packed_index(2, 0, 0), 0);
  EXPECT_EQ(packed_index(2, 0, 1), 1);
  EXPECT_EQ(packed_index(2, 1, 1), 2);
  EXPECT_EQ(packed_index(3, 1, 2), 4);
  EXPECT_EQ(packed_index(3, 2, 1), 4);
  EXPECT_EQ(packed_index(3, 2, 2), 5);
}

TEST(Spd, LogOfIdentityIsZero) {
  Grid grid = Grid::make2d(4, 4);
  MetricField l = pointwise_matrix_map(MetricField::identity(grid), MatrixFunction::Log);
  for (double v : l.data()) EXPECT_EQ(v, 0.0);
}

TEST(Spd, LogOfDiagonal) {
  Mat a(2, 2);
  a << std::exp(1.0), 0, 0, std::exp(2.0);
  Mat l = matrix_function(a, MatrixFunction::Log);
  EXPECT_NEAR(l(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(l(1, 1), 2.0, 1e-14);
  EXPECT_NEAR(l(0, 1), 0.0, 1e-14);
}

TEST(Spd, RoundTrips) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 2;
    Mat a = test::random_spd(rng, n);
    Mat back = matrix_function(matrix_function(a, MatrixFunction::Log), MatrixFunction::Exp);
    EXPECT_LT(test::rel_frobenius(back, a), 1e-12);
    Mat r = matrix_function(a, MatrixFunction::Sqrt);
    EXPECT_LT(test::rel_frobenius(r * r, a), 1e-12);
    Mat inv = matrix_function(a, MatrixFunction::Inverse);
    EXPECT_LT((inv * a - Mat::Identity(n, n)).norm(), 1e-12);
  }
}

TEST(Spd, NonPdVoxelIsNamed) {
  Grid grid = Grid::make2d(3, 3);
  MetricField f = MetricField::identity(grid);
  Mat bad(2, 2);
  bad << 1, 0, 0, -1;
  f.set(5, bad);
  try {
    pointwise_matrix_map(f, MatrixFunction::Log);
    FAIL();
  } catch (const NotPositiveDefinite& e) {
    EXPECT_EQ(e.voxel(), 5u);
  }
  EXPECT_THROW(volume_density(f), NotPositiveDefinite);
}

TEST(Spd, VolumeDensity) {
  Grid grid = Grid::make2d(3, 3);
  Mat d(2, 2);
  d << 4, 0, 0, 9;
  ScalarField v = volume_density(MetricField::constant(grid, d));
  for (double x : v.data()) EXPECT_DOUBLE_EQ(x, 6.0);
  const ScalarField ones = volume_density(MetricField::identity(grid));
  for (double x : ones.data()) EXPECT_DOUBLE_EQ(x, 1.0);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    Mat a = test::random_spd(rng, 3);
    MetricField f = MetricField::constant(Grid::make3d(3, 3, 3), a);
    const SymEig e = sym_eig(a);
    double prod = 1.0;
    for (int i = 0; i < 3; ++i) prod *= std::sqrt(e.values[i]);
    EXPECT_NEAR(volume_density(f)[0], prod, 1e-12 * prod);
  }
}

TEST(Spd, Projection) {
  Mat a(2, 2);
  a << 1, 0, 0, -0.5;
  Mat p = spd_project(a, 1e-12);
  EXPECT_NEAR(p(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(p(1, 1), 1e-12, 1e-20);
  EXPECT_NEAR(p(0, 1), 0.0, 1e-15);

  Mat spd(2, 2);
  spd << 2, 0.3, 0.3, 1.5;
  Mat same = spd_project(spd);
  EXPECT_EQ(same, spd);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Mat s = test::random_symmetric(rng, 3);
    Mat once = spd_project(s, 1e-3);
    Mat twice = spd_project(once, 1e-3);
    EXPECT_LT((once - twice).norm(), 1e-12 * std::max(1.0, once.norm()));
    EXPECT_TRUE(is_spd(once, 1e-3 * (1 - 1e-9)));
  }
}

TEST(Interpolate, NodesAffineAndClamp) {
  Grid grid = Grid::make2d(6, 5, 0.5, 0.25, -1.0, 2.0);
  ScalarField f = ScalarField::from_function(grid, [](const Vec& p) { return 2 * p[0] + 3 * p[1]; });
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(interpolate(f, grid.position(i)), f[i]);
  for (int i = 0; i + 1 < 6; ++i) {
    for (int j = 0; j + 1 < 5; ++j) {
      Vec c(2);
      c << -1.0 + 0.5 * (i + 0.5), 2.0 + 0.25 * (j + 0.5);
      bool ood = true;
      EXPECT_NEAR(interpolate(f, c, &ood), 2 * c[0] + 3 * c[1], 1e-13);
      EXPECT_FALSE(ood);
    }
  }
  Vec out(2);
  out << -2.0, 2.5;
  bool ood = false;
  Vec edge(2);
  edge << -1.0, 2.5;
  EXPECT_NEAR(interpolate(f, out, &ood), interpolate(f, edge), 1e-14);
  EXPECT_TRUE(ood);
}

TEST(Interpolate, MetricComponentwise) {
  Grid grid = Grid::make2d(4, 4);
  MetricField f = MetricField::from_function(grid, [](const Vec& p) {
    Mat m(2, 2);
    m << 1 + p[0], 0.1 * p[1], 0.1 * p[1], 2 + p[1];
    return m;
  });
  Vec p(2);
  p << 1.25, 2.5;
  Mat m = interpolate(f, p);
  EXPECT_NEAR(m(0, 0), 2.25, 1e-14);
  EXPECT_NEAR(m(0, 1), 0.25, 1e-14);
  EXPECT_NEAR(m(1, 1), 4.5, 1e-14);
}

TEST(Differential, ChristoffelConstantMetricsVanish) {
  Grid grid = Grid::make2d(8, 8, 0.1, 0.1);
  MaskField mask = MaskField::full(grid);
  for (double c : {1.0, 5.0}) {
    Mat m = c * Mat::Identity(2, 2);
    ChristoffelField gamma = christoffel_symbols(MetricField::constant(grid, m), mask);
    for (double v : gamma.data()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Differential, ChristoffelConformalMetric) {
  double prev = 0.0;
  for (int n : {17, 33, 65}) {
    Grid grid = test::unit_square(n);
    MaskField mask = MaskField::full(grid);
    MetricField g = MetricField::from_function(grid, [](const Vec& p) {
      return Mat(std::exp(0.2 * p[0]) * Mat::Identity(2, 2));
    });
    ChristoffelField gamma = christoffel_symbols(g, mask);
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Index3 c = grid.coords(i);
      if (c[0] == 0 || c[1] == 0 || c[0] == n - 1 || c[1] == n - 1) continue;
      err = std::max(err, std::abs(gamma(i, 0, 0, 0) - 0.1));
      err = std::max(err, std::abs(gamma(i, 0, 1, 1) + 0.1));
      err = std::max(err, std::abs(gamma(i, 1, 0, 1) - 0.1));
      err = std::max(err, std::abs(gamma(i, 1, 1, 0) - gamma(i, 1, 0, 1)));
      err = std::max(err, std::abs(gamma(i, 0, 0, 1)));
    }
    EXPECT_LT(err, 1e-4);
    if (prev > 0.0) EXPECT_GT(std::log2(prev / err), 1.8);
    prev = err;
  }
}

TEST(Differential, ThrowsWithoutNeighbour) {
  Grid grid = Grid::make2d(5, 5);
  MaskField mask(grid);
  mask.set(grid.index({2, 2, 0}), true);
  mask.set(grid.index({3, 2, 0}), true);
  EXPECT_THROW(derivative_stencil(grid, &mask, grid.index({2, 2, 0}), 1), Error);
  EXPECT_NO_THROW(derivative_stencil(grid, &mask, grid.index({2, 2, 0}), 0));
}

namespace {

// Max interior error of nabla_V V for the unit rotational field on an annulus.
double rotational_error(int n) {
  const double h = 2.0 / (n - 1);
  Grid grid = Grid::make2d(n, n, h, h, -1.0, -1.0);
  MaskField mask = MaskField::from_function(grid, [](const Vec& p) {
    const double r = p.norm();
    return r > 0.3 && r < 0.95;
  });
  VectorField v = VectorField::from_function(grid, [](const Vec& p) {
    const double r = p.norm();
    Vec out(2);
    out << -p[1] / std::max(r, 1e-9), p[0] / std::max(r, 1e-9);
    return out;
  });
  VectorField acc = covariant_derivative_vv(v, MetricField::identity(grid), mask);
  double err = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec p = grid.position(i);
    const double r = p.norm();
    if (!(r > 0.4 && r < 0.85)) continue;
    const Vec expect = -p / (r * r);
    err = std::max(err, (acc.at(i) - expect).norm());
  }
  return err;
}

}  // namespace

TEST(Differential, CovariantDerivative) {
  Grid grid = Grid::make2d(6, 6);
  MaskField mask = MaskField::full(grid);
  VectorField c = VectorField::from_function(grid, [](const Vec&) {
    Vec v(2);
    v << 0.6, 0.8;
    return v;
  });
  const VectorField still = covariant_derivative_vv(c, MetricField::identity(grid), mask);
  for (double x : still.data()) EXPECT_NEAR(x, 0.0, 1e-15);

  const double e1 = rotational_error(41), e2 = rotational_error(81);
  EXPECT_LT(e2, 0.05);
  EXPECT_GT(e1 / e2, 3.5);
}

TEST(Differential, Divergence) {
  Grid grid = test::unit_square(11);
  MaskField mask = MaskField::full(grid);
  VectorField x = VectorField::from_function(grid, [](const Vec& p) { return p; });
  for (double c : {1.0, 7.0}) {
    MetricField g = MetricField::constant(grid, c * Mat::Identity(2, 2));
    ScalarField d = riemannian_divergence(x, g, mask);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(d[i], 2.0, 1e-12);
  }
  VectorField k = VectorField::from_function(grid, [](const Vec&) {
    Vec v(2);
    v << 1.0, -2.0;
    return v;
  });
  const ScalarField flat = riemannian_divergence(k, MetricField::identity(grid), mask);
  for (double v : flat.data()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Differential, DivergenceConvergesAtSecondOrder) {
  double prev = 0.0;
  for (int n : {17, 33, 65}) {
    Grid grid = test::unit_square(n);
    MaskField mask = MaskField::full(grid);
    MetricField g = MetricField::from_function(grid, [](const Vec& p) {
      return Mat(std::exp(p[0] + 0.5 * p[1]) * Mat::Identity(2, 2));
    });
    VectorField x = VectorField::from_function(grid, [](const Vec& p) {
      Vec v(2);
      v << std::sin(p[0]), std::cos(p[1]);
      return v;
    });
    ScalarField d = riemannian_divergence(x, g, mask);
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Vec p = grid.position(i);
      // sqrt(det g) = exp(x + y/2): div = cos x - sin y + sin x + 0.5 cos y
      const double expect = std::cos(p[0]) - std::sin(p[1]) + std::sin(p[0]) + 0.5 * std::cos(p[1]);
      err = std::max(err, std::abs(d[i] - expect));
    }
    if (prev > 0.0) EXPECT_GT(std::log2(prev / err), 1.8);
    prev = err;
  }
}

TEST(Differential, GradientAndDuality) {
  Grid grid = test::unit_square(9);
  MaskField mask = MaskField::full(grid);
  Mat d(2, 2);
  d << 4, 0, 0, 1;
  ScalarField alpha = ScalarField::from_function(grid, [](const Vec& p) { return p[0]; });
  VectorField gr = riemannian_gradient(alpha, MetricField::constant(grid, d), mask);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(gr.at(i)[0], 0.25, 1e-12);
    EXPECT_NEAR(gr.at(i)[1], 0.0, 1e-12);
  }

  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  MetricField g = test::smooth_metric(grid);
  ScalarField a = ScalarField::from_function(grid, [](const Vec& p) { return std::sin(3 * p[0]) * p[1]; });
  VectorField grad = riemannian_gradient(a, g, mask);
  VectorField da = differential(a, mask);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t i = rng() % grid.size();
    Vec w(2);
    w << nd(rng), nd(rng);
    const double lhs = grad.at(i).dot(g.at(i) * w);
    const double rhs = da.at(i).dot(w);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Poisson, InverseConsistency) {
  Grid grid = test::unit_square(33);
  DirichletLaplacian lap(grid);
  ScalarField w = ScalarField::from_function(grid, [](const Vec& p) {
    return std::pow(std::sin(M_PI * p[0]) * std::sin(M_PI * p[1]), 3) * std::cos(p[0] - p[1]);
  });
  ScalarField lw = lap.apply_laplacian(w);
  VectorField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f.voxel(i)[0] = f.voxel(i)[1] = lw[i];
  VectorField v = information_metric_smooth(f, {1e-12, 0});
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    scale = std::max(scale, std::abs(w[i]));
    err = std::max(err, std::abs(v.voxel(i)[0] + w[i]));
    err = std::max(err, std::abs(v.voxel(i)[1] + w[i]));
  }
  EXPECT_LT(err, 1e-9 * scale);

  VectorField zero(grid);
  const VectorField none = information_metric_smooth(zero);
  for (double x : none.data()) EXPECT_EQ(x, 0.0);
}

TEST(Poisson, Eigenfunction) {
  double prev = 0.0;
  for (int n : {17, 33}) {
    Grid grid = test::unit_square(n);
    DirichletLaplacian lap(grid);
    ScalarField f = ScalarField::from_function(grid, [](const Vec& p) {
      return std::sin(M_PI * p[0]) * std::sin(M_PI * p[1]);
    });
    ScalarField u = lap.solve(f, {1e-12, 0});
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) err = std::max(err, std::abs(u[i] - f[i] / (2 * M_PI * M_PI)));
    EXPECT_LT(err, 2e-3);
    if (prev > 0.0) EXPECT_GT(prev / err, 3.5);
    prev = err;
  }
}

TEST(Parallel, TreeSumIndependentOfThreads) {
  std::vector<double> v(10007);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& x : v) x = u(rng) * std::pow(10.0, (rng() % 20) - 10.0);
  const double a = tree_sum(v);
  std::vector<double> copy(v);
  EXPECT_EQ(a, tree_sum(copy));
  std::vector<double> out(v.size());
  parallel_for(v.size(), [&](std::size_t i) { out[i] = v[i]; });
  EXPECT_EQ(a, tree_sum(out));
}
