#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rmatlas/conformal.hpp"
#include "rmatlas/error.hpp"
#include "rmatlas/poisson.hpp"
#include "rmatlas/synthetic.hpp"
#include "test_util.hpp"

using namespace rmatlas;

namespace {

TensorImage constant_tensors(const Grid& grid, const Mat& d) {
  return {MetricField::constant(grid, d), MaskField::full(grid)};
}

struct Annulus {
  Grid grid;
  MaskField mask;
  VectorField v;
};

Annulus rotational_annulus(int n) {
  const double h = 2.0 / (n - 1);
  Annulus a{Grid::make2d(n, n, h, h, -1.0, -1.0), {}, {}};
  a.mask = MaskField::from_function(a.grid, [](const Vec& p) {
    const double r = p.norm();
    return r > 0.3 && r < 0.9;
  }).pruned();
  a.v = VectorField::from_function(a.grid, [](const Vec& p) {
    const double r = std::max(p.norm(), 1e-9);
    Vec out(2);
    out << -p[1] / r, p[0] / r;
    return out;
  });
  return a;
}

ScalarField smooth_perturbation(const Grid& grid, const MaskField& mask, int k) {
  ScalarField d = ScalarField::from_function(grid, [k](const Vec& p) {
    return std::sin((k % 5 + 1) * p[0] + 0.3 * k) * std::cos((k % 3 + 1) * p[1] - 0.1 * k);
  });
  double sum = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (mask[i]) sum += d[i], ++cnt;
  for (std::size_t i = 0; i < grid.size(); ++i) d[i] = mask[i] ? d[i] - sum / cnt : 0.0;
  return d;
}

ScalarField axpy(const ScalarField& a, double s, const ScalarField& d) {
  ScalarField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * d[i];
  return out;
}

}  // namespace

TEST(InverseTensorMetric, HandValues) {
  Grid grid = Grid::make2d(4, 4);
  MetricField g = inverse_tensor_metric(constant_tensors(grid, Mat::Identity(2, 2)));
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(g.at(i), Mat(Mat::Identity(2, 2)));
  Mat d(2, 2);
  d << 6, 0, 0, 1;
  g = inverse_tensor_metric(constant_tensors(grid, d));
  EXPECT_NEAR(g.at(3)(0, 0), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(g.at(3)(1, 1), 1.0, 1e-15);

  std::mt19937_64 rng(21);
  MetricField t(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) t.set(i, test::random_spd(rng, 2));
  g = inverse_tensor_metric({t, MaskField::full(grid)});
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LT((g.at(i) * t.at(i) - Mat::Identity(2, 2)).norm(), 1e-12);

  MaskField partial = MaskField::full(grid);
  partial.set(0, false);
  t.set(0, -Mat::Identity(2, 2));
  g = inverse_tensor_metric({t, partial});
  EXPECT_EQ(g.at(0), Mat(Mat::Identity(2, 2)));
  EXPECT_THROW(inverse_tensor_metric({t, MaskField::full(grid)}), NotPositiveDefinite);
}

TEST(PrincipalEigenvector, ConstantAndUnit) {
  Grid grid = Grid::make2d(5, 5);
  Mat d(2, 2);
  d << 6, 0, 0, 1;
  PrincipalDirections pd = principal_eigenvector_field(constant_tensors(grid, d));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(pd.vectors.at(i)[0], 1.0, 1e-15);
    EXPECT_NEAR(pd.vectors.at(i)[1], 0.0, 1e-15);
    EXPECT_TRUE(pd.reliable[i]);
  }
  PrincipalDirections iso = principal_eigenvector_field(constant_tensors(grid, Mat::Identity(2, 2)));
  EXPECT_EQ(iso.reliable.count(), 0u);
}

TEST(PrincipalEigenvector, RecoversSyntheticGenerator) {
  CubicFamilySpec spec;
  spec.grid = default_synthetic_grid(48);
  auto [v, mask] = cubic_vector_field(spec);
  PrincipalDirections pd = principal_eigenvector_field(tensors_from_field(v, spec.rho, mask));
  double worst = 0.0;
  Vec first;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const Vec e = pd.vectors.at(i);
    EXPECT_NEAR(e.norm(), 1.0, 1e-12);
    const double c = std::min(1.0, std::abs(e.dot(v.at(i))));
    worst = std::max(worst, std::acos(c));
    // flood fill keeps one orientation along the band
    if (first.size() == 0) first = e.dot(v.at(i)) > 0 ? Vec(e) : Vec(-e);
    EXPECT_GT(e.dot(v.at(i)) * (first.dot(v.at(i)) > 0 ? 1.0 : -1.0), 0.0);
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(SolveAlpha, ConstantFieldGivesZero) {
  Grid grid = Grid::make2d(12, 10, 0.5, 0.5);
  MaskField mask = MaskField::full(grid);
  VectorField v = VectorField::from_function(grid, [](const Vec&) {
    Vec out(2);
    out << 0.6, -0.8;
    return out;
  });
  AlphaReport rep;
  ScalarField alpha = solve_alpha(v, MetricField::identity(grid), mask, nullptr, {}, &rep);
  for (double a : alpha.data()) EXPECT_EQ(a, 0.0);
  EXPECT_LT(rep.relative_residual, 1e-10);

  ConnectomeMetric cm = build_connectome_metric(constant_tensors(grid, Mat::Identity(2, 2)));
  for (double a : cm.alpha.data()) EXPECT_EQ(a, 0.0);
  for (std::size_t i = 0; i < cm.g_alpha.data().size(); ++i) EXPECT_EQ(cm.g_alpha.data()[i], cm.g_tilde.data()[i]);
}

TEST(SolveAlpha, NormalMatrixIsSymmetric) {
  Annulus a = rotational_annulus(31);
  MetricField g = test::smooth_metric(test::unit_square(31));
  MetricField gg(a.grid);
  for (std::size_t i = 0; i < a.grid.size(); ++i) gg.set(i, g.at(i));
  SparseMatrix l = conformal_normal_matrix(gg, a.mask);
  SparseMatrix lt = l.transpose();
  EXPECT_LT((l - lt).norm(), 1e-10 * l.norm());
  EXPECT_EQ(l.rows(), static_cast<Eigen::Index>(a.mask.count()));
}

TEST(SolveAlpha, AnnulusLeastSquaresOptimality) {
  Annulus a = rotational_annulus(41);
  MetricField g = MetricField::identity(a.grid);
  AlphaReport rep;
  ScalarField alpha = solve_alpha(a.v, g, a.mask, nullptr, {1e-10, 0}, &rep);
  const double f = conformal_functional(alpha, a.v, g, a.mask);
  EXPECT_LE(f, rep.functional_before);
  double mean = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (a.mask[i]) mean += alpha[i];
  EXPECT_NEAR(mean, 0.0, 1e-9);
  for (int k = 0; k < 50; ++k) {
    ScalarField d = smooth_perturbation(a.grid, a.mask, k);
    const double fp = conformal_functional(axpy(alpha, 1.0, d), a.v, g, a.mask);
    const double fm = conformal_functional(axpy(alpha, -1.0, d), a.v, g, a.mask);
    const double linear = 0.5 * (fp - fm);
    const double quad = 0.5 * (fp + fm) - f;
    EXPECT_LT(std::abs(linear), 1e-6 * std::sqrt(quad * rep.functional_before));
    EXPECT_GE(conformal_functional(axpy(alpha, 1e-3, d), a.v, g, a.mask), f);
  }
}

TEST(SolveAlpha, SyntheticReducesFunctional) {
  CubicFamilySpec spec;
  spec.grid = default_synthetic_grid(48);
  AlphaReport rep;
  ConnectomeMetric cm = build_connectome_metric(synthesize_subject(spec), {}, &rep);
  EXPECT_LT(rep.functional_after, rep.functional_before);
  EXPECT_LE(rep.relative_residual, 1e-8);
  const int n = 2;
  for (std::size_t i = 0; i < cm.mask.size(); ++i) {
    if (!cm.mask[i]) continue;
    const double lhs = cm.g_alpha.at(i).determinant();
    const double rhs = std::exp(n * cm.alpha[i]) * cm.g_tilde.at(i).determinant();
    EXPECT_NEAR(lhs, rhs, 1e-10 * rhs);
  }
}

TEST(SolveAlpha, NonConvergenceReportsResidual) {
  Annulus a = rotational_annulus(41);
  try {
    solve_alpha(a.v, MetricField::identity(a.grid), a.mask, nullptr, {1e-14, 2});
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_GT(e.relative_residual(), 1e-14);
    EXPECT_EQ(e.iterations(), 2);
  }
}
