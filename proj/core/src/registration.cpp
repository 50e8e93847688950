#include "rmatlas/registration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rmatlas/differential.hpp"
#include "rmatlas/ebin.hpp"
#include "rmatlas/error.hpp"
#include "rmatlas/interpolate.hpp"
#include "rmatlas/parallel.hpp"
#include "rmatlas/spd.hpp"

namespace rmatlas {

namespace {

constexpr double kPi = std::numbers::pi;

struct PairTerm {
  double value = 0.0;
  Mat grad;  // d value / d B
};

// Squared distance density between A (given through A^{-1/2} and det(A)^{1/4})
// and B, optionally with its derivative with respect to B.
PairTerm pair_term(const Mat& a_isqrt, double a, const Mat& b, bool want_grad, std::size_t voxel) {
  const int n = static_cast<int>(b.rows());
  const SymEig e = sym_eig(symmetrize(a_isqrt * b * a_isqrt));
  if (!(e.values.minCoeff() > 0.0)) throw NotPositiveDefinite(voxel, "matching energy: pulled-back metric");
  Vec ell = e.values.array().log().matrix();
  const double mean = ell.sum() / n;
  const double spread = (ell.array() - mean).square().sum();
  const double kappa = std::sqrt(n * spread) / 4.0;
  const double bq = a * std::exp(ell.sum() / 4.0);
  const double theta = std::min(kappa, kPi);
  const double half = std::sin(0.5 * theta);
  PairTerm out;
  out.value = 16.0 / n * ((a - bq) * (a - bq) + 4.0 * a * bq * half * half);
  if (!want_grad) return out;
  double sinc = 0.0;
  if (kappa < kPi) sinc = kappa < 1e-8 ? 1.0 - kappa * kappa / 6.0 : std::sin(kappa) / kappa;
  const double radial = 16.0 / n * (2.0 * bq - 2.0 * a * std::cos(theta)) * bq / 4.0;
  const double angular = 2.0 * a * bq * sinc;
  Vec c(n);
  for (int i = 0; i < n; ++i) c[i] = (radial + angular * (ell[i] - mean)) / e.values[i];
  out.grad = a_isqrt * (e.vectors * c.asDiagonal() * e.vectors.transpose()) * a_isqrt;
  return out;
}

}  // namespace

void RegistrationConfig::validate() const {
  if (!(lambda > 0.0)) throw Error("registration: lambda must be > 0");
  if (!(epsilon > 0.0)) throw Error("registration: epsilon must be > 0");
  if (max_iter < 0) throw Error("registration: max_iter must be >= 0");
  if (max_halvings < 0) throw Error("registration: max_halvings must be >= 0");
  if (!(solver_tolerance > 0.0)) throw Error("registration: solver tolerance must be > 0");
}

double dist_diff(const Diffeomorphism& phi, const MaskField& mask) {
  const MetricField identity = MetricField::identity(phi.grid());
  return ebin_distance(identity, pullback_metric(phi, identity, mask), mask);
}

EnergyTerms matching_energy(const Diffeomorphism& phi, const MetricField& g0, const MetricField& g1, double lambda,
                            const MaskField& mask) {
  const MetricField identity = MetricField::identity(phi.grid());
  EnergyTerms t;
  t.deformation = ebin_sq_distance(identity, pullback_metric(phi, identity, mask), mask);
  t.matching = ebin_sq_distance(g0, pullback_metric(phi, g1, mask), mask);
  t.total = t.deformation + lambda * t.matching;
  return t;
}

VectorField energy_gradient(const Diffeomorphism& phi, const MetricField& g0, const MetricField& g1, double lambda,
                            const MaskField& mask) {
  return MatchingProblem(g0, g1, lambda, mask).gradient(phi);
}

VectorField information_metric_smooth(const VectorField& grad, const CgSettings& settings) {
  return DirichletLaplacian(grad.grid()).solve(grad, settings);
}

MatchingProblem::MatchingProblem(const MetricField& g0, const MetricField& g1, double lambda, const MaskField& mask)
    : g0_(g0), g1_(g1), lambda_(lambda), mask_(mask) {
  require_same_grid(g0.grid(), g1.grid(), "matching problem");
  require_same_grid(g0.grid(), mask.grid(), "matching problem");
  require_spd(g0, mask, "matching problem: g0");
  g0_isqrt_.resize(g0.size());
  g0_a_.assign(g0.size(), 1.0);
  for (std::size_t v = 0; v < g0.size(); ++v) {
    if (!mask[v]) continue;
    const SymEig e = sym_eig(g0.at(v));
    g0_isqrt_[v] = sym_apply(e, [](double x) { return 1.0 / std::sqrt(x); });
    g0_a_[v] = std::pow(e.values.prod(), 0.25);
  }
}

EnergyTerms MatchingProblem::energy(const Diffeomorphism& phi) const {
  require_same_grid(phi.grid(), g0_.grid(), "matching energy");
  const Grid& grid = g0_.grid();
  const int n = grid.dim();
  const Mat eye = Mat::Identity(n, n);
  std::vector<double> def(grid.size(), 0.0), match(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t v) {
    if (!mask_[v]) return;
    const Mat j = phi.jacobian(v);
    if (!(j.determinant() > 0.0)) throw NotPositiveDefinite(v, "matching energy: det(d phi) <= 0");
    def[v] = pair_term(eye, 1.0, j.transpose() * j, false, v).value;
    const Mat b = spd_project(symmetrize(j.transpose() * interpolate(g1_, phi.apply(v)) * j));
    match[v] = pair_term(g0_isqrt_[v], g0_a_[v], b, false, v).value;
  });
  EnergyTerms t;
  t.deformation = tree_sum(def) * grid.cell_volume();
  t.matching = tree_sum(match) * grid.cell_volume();
  t.total = t.deformation + lambda_ * t.matching;
  return t;
}

VectorField MatchingProblem::gradient(const Diffeomorphism& phi) const {
  require_same_grid(phi.grid(), g0_.grid(), "energy gradient");
  const Grid& grid = g0_.grid();
  const int n = grid.dim();
  const int pc = packed_size(n);
  const double cell = grid.cell_volume();
  const Mat eye = Mat::Identity(n, n);
  std::vector<Mat> jbar(grid.size());
  std::vector<Vec> dpos(grid.size());
  parallel_for(grid.size(), [&](std::size_t v) {
    if (!mask_[v]) return;
    const Mat j = phi.jacobian(v);
    if (!(j.determinant() > 0.0)) throw NotPositiveDefinite(v, "energy gradient: det(d phi) <= 0");
    const Vec p = phi.apply(v);
    const Mat g = interpolate(g1_, p);
    const PairTerm d = pair_term(eye, 1.0, j.transpose() * j, true, v);
    const PairTerm m = pair_term(g0_isqrt_[v], g0_a_[v], symmetrize(j.transpose() * g * j), true, v);
    jbar[v] = cell * (2.0 * j * d.grad + 2.0 * lambda_ * g * j * m.grad);
    const Mat inner = j * m.grad * j.transpose();
    Vec dp = Vec::Zero(n);
    std::vector<double> packed(pc);
    for (int c = 0; c < n; ++c) {
      const DerivativeWeights dw = derivative_weights(grid, p, c);
      if (dw.count == 0) continue;
      interpolate_into(g1_, dw, packed);
      dp[c] = cell * lambda_ * (inner.cwiseProduct(unpack_symmetric(packed, n))).sum();
    }
    dpos[v] = dp;
  });

  VectorField grad(grid);
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (!mask_[v]) continue;
    auto out = grad.voxel(v);
    for (int a = 0; a < n; ++a) out[a] += dpos[v][a];
    for (int b = 0; b < n; ++b) {
      const AxisStencil st = derivative_stencil(grid, nullptr, v, b);
      for (int k = 0; k < st.count; ++k) {
        auto target = grad.voxel(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(v) + st.offset[k]));
        for (int a = 0; a < n; ++a) target[a] += jbar[v](a, b) * st.weight[k];
      }
    }
  }
  return grad;
}

RegistrationResult register_metrics(const MetricField& g0, const MetricField& g1, const RegistrationConfig& config,
                                    const MaskField& mask, const std::optional<Diffeomorphism>& initial) {
  config.validate();
  require_same_grid(g0.grid(), g1.grid(), "register");
  require_same_grid(g0.grid(), mask.grid(), "register");
  mask.validate();
  require_spd(g1, mask, "register: g1");
  const Grid& grid = g0.grid();
  const int n = grid.dim();
  const MatchingProblem problem(g0, g1, config.lambda, mask);
  const double min_spacing = *std::min_element(grid.spacing().begin(), grid.spacing().begin() + n);
  const DirichletLaplacian laplacian(grid);
  CgSettings cg;
  cg.tolerance = config.solver_tolerance;

  RegistrationResult result{initial ? *initial : Diffeomorphism(grid), {}};
  if (initial) require_same_grid(initial->grid(), grid, "register: initial map");
  EnergyTerms current = problem.energy(result.phi);
  result.report.initial = current;

  for (int it = 0; it < config.max_iter; ++it) {
    if (current.total <= 1e-24) break;
    const VectorField grad_u = problem.gradient(result.phi);

    // Gradient with respect to the increment w in (id + w) o phi, as an L2 density.
    VectorField grad_w(grid);
    for (std::size_t x = 0; x < grid.size(); ++x) {
      const auto gx = grad_u.voxel(x);
      if (std::all_of(gx.begin(), gx.end(), [](double c) { return c == 0.0; })) continue;
      const SampleWeights sw = sample_weights(grid, result.phi.apply(x));
      for (int k = 0; k < sw.count; ++k) {
        auto target = grad_w.voxel(sw.index[k]);
        for (int a = 0; a < n; ++a) target[a] += sw.weight[k] * gx[a] / grid.cell_volume();
      }
    }
    const VectorField v = laplacian.solve(grad_w, cg);
    if (std::all_of(v.data().begin(), v.data().end(), [](double c) { return c == 0.0; })) break;

    // Fixed: epsilon is the largest increment displacement in voxels.
    // Energy-adaptive: the step at which the linearized energy would vanish.
    double eps = 0.0;
    if (config.epsilon_policy == EpsilonPolicy::Fixed) {
      double vmax = 0.0;
      for (std::size_t x = 0; x < grid.size(); ++x) vmax = std::max(vmax, v.at(x).norm());
      eps = config.epsilon * min_spacing / vmax;
    } else {
      double slope = 0.0;
      for (std::size_t i = 0; i < v.data().size(); ++i) slope += grad_w.data()[i] * v.data()[i];
      slope *= grid.cell_volume();
      if (!(slope > 0.0)) break;
      eps = current.total / slope;
    }
    bool accepted = false;
    EnergyTerms next;
    for (int h = 0; h <= config.max_halvings && !accepted; ++h, eps *= 0.5) {
      VectorField u = result.phi.displacement();
      for (std::size_t x = 0; x < grid.size(); ++x) u.set(x, u.at(x) - eps * interpolate(v, result.phi.apply(x)));
      Diffeomorphism candidate(std::move(u));
      if (!(candidate.min_jacobian_determinant(mask) > 0.0)) continue;
      next = problem.energy(candidate);
      if (next.total <= current.total) {
        result.phi = std::move(candidate);
        accepted = true;
        result.report.epsilon.push_back(eps);
      }
    }
    if (!accepted) result.report.epsilon.push_back(0.0);
    else current = next;
    result.report.total.push_back(current.total);
    result.report.deformation.push_back(current.deformation);
    result.report.matching.push_back(current.matching);
    result.report.accepted.push_back(accepted);
    if (!accepted) break;
  }
  return result;
}

}  // namespace rmatlas
