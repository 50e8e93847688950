#include "rmatlas/conformal.hpp"

#include <cmath>
#include <deque>
#include <vector>

#include "rmatlas/differential.hpp"
#include "rmatlas/error.hpp"
#include "rmatlas/spd.hpp"

namespace rmatlas {

namespace {

// Sparse gradient operator: row (voxel u, axis j) -> d alpha/dx_j at the u-th masked voxel.
struct MaskedGradient {
  std::vector<std::ptrdiff_t> unknown_of_voxel;
  std::vector<std::size_t> voxel_of_unknown;
  SparseMatrix d;
};

MaskedGradient masked_gradient(const Grid& grid, const MaskField& mask) {
  MaskedGradient mg;
  mg.unknown_of_voxel.assign(grid.size(), -1);
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (!mask[v]) continue;
    mg.unknown_of_voxel[v] = static_cast<std::ptrdiff_t>(mg.voxel_of_unknown.size());
    mg.voxel_of_unknown.push_back(v);
  }
  const int n = grid.dim();
  const auto m = static_cast<Eigen::Index>(mg.voxel_of_unknown.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mg.voxel_of_unknown.size() * n * 3);
  for (std::size_t u = 0; u < mg.voxel_of_unknown.size(); ++u) {
    const std::size_t v = mg.voxel_of_unknown[u];
    for (int a = 0; a < n; ++a) {
      const AxisStencil st = derivative_stencil(grid, &mask, v, a);
      for (int k = 0; k < st.count; ++k) {
        const auto nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(v) + st.offset[k]);
        trips.emplace_back(static_cast<int>(u * n + a), static_cast<int>(mg.unknown_of_voxel[nb]), st.weight[k]);
      }
    }
  }
  mg.d.resize(m * n, m);
  mg.d.setFromTriplets(trips.begin(), trips.end());
  return mg;
}

// Block-diagonal weight sqrt(det g) * cell volume * g^{-1}.
SparseMatrix metric_weights(const MetricField& g, const MaskedGradient& mg) {
  const int n = g.grid().dim();
  const double cell = g.grid().cell_volume();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mg.voxel_of_unknown.size() * n * n);
  for (std::size_t u = 0; u < mg.voxel_of_unknown.size(); ++u) {
    const std::size_t v = mg.voxel_of_unknown[u];
    const Mat gm = g.at(v);
    if (!is_spd(gm)) throw NotPositiveDefinite(v, "conformal estimation: metric");
    const Mat w = std::sqrt(gm.determinant()) * cell * matrix_function(gm, MatrixFunction::Inverse);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        trips.emplace_back(static_cast<int>(u * n + i), static_cast<int>(u * n + j), w(i, j));
  }
  SparseMatrix wm(mg.d.rows(), mg.d.rows());
  wm.setFromTriplets(trips.begin(), trips.end());
  return wm;
}

// Covector target omega = g (2 nabla_V V), zero on unreliable voxels.
VectorField target_covector(const VectorField& v, const MetricField& g, const MaskField& mask,
                            const MaskField* reliable) {
  const VectorField acc = covariant_derivative_vv(v, g, mask);
  VectorField omega(g.grid());
  for (std::size_t x = 0; x < g.size(); ++x) {
    if (!mask[x] || (reliable != nullptr && !(*reliable)[x])) continue;
    omega.set(x, g.at(x) * (2.0 * acc.at(x)));
  }
  return omega;
}

void remove_component_means(ScalarField& alpha, const MaskField& mask) {
  const std::vector<int> labels = mask.component_labels();
  int count = 0;
  for (int l : labels) count = std::max(count, l + 1);
  std::vector<double> sum(count, 0.0);
  std::vector<std::size_t> num(count, 0);
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (labels[v] < 0) continue;
    sum[labels[v]] += alpha[v];
    ++num[labels[v]];
  }
  for (std::size_t v = 0; v < labels.size(); ++v)
    if (labels[v] >= 0) alpha[v] -= sum[labels[v]] / static_cast<double>(num[labels[v]]);
}

}  // namespace

MetricField inverse_tensor_metric(const TensorImage& d) {
  require_same_grid(d.tensors.grid(), d.mask.grid(), "inverse_tensor_metric");
  MetricField g = MetricField::identity(d.grid());
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (!d.mask[v]) continue;
    const Mat t = d.tensors.at(v);
    if (!is_spd(t)) throw NotPositiveDefinite(v, "inverse_tensor_metric: diffusion tensor");
    g.set(v, matrix_function(t, MatrixFunction::Inverse));
  }
  g.set_spd_flag(true);
  return g;
}

PrincipalDirections principal_eigenvector_field(const TensorImage& d) {
  require_same_grid(d.tensors.grid(), d.mask.grid(), "principal_eigenvector_field");
  const Grid& grid = d.grid();
  const int n = grid.dim();
  PrincipalDirections out{VectorField(grid), MaskField(grid)};
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (!d.mask[v]) continue;
    const Mat t = d.tensors.at(v);
    if (!is_spd(t)) throw NotPositiveDefinite(v, "principal_eigenvector_field: diffusion tensor");
    const SymEig e = sym_eig(t);
    const double top = e.values[n - 1];
    const double second = e.values[n - 2];
    Vec dir = e.vectors.col(n - 1);
    dir.normalize();
    out.vectors.set(v, dir);
    out.reliable.set(v, top - second > 1e-9 * top);
  }

  // Greedy flood fill: each newly reached voxel is flipped to agree with its
  // already visited reliable neighbours.
  std::vector<unsigned char> visited(grid.size(), 0);
  for (std::size_t seed = 0; seed < grid.size(); ++seed) {
    if (!d.mask[seed] || visited[seed] || !out.reliable[seed]) continue;
    Vec s = out.vectors.at(seed);
    for (int a = 0; a < n; ++a) {
      if (std::abs(s[a]) > 1e-6) {
        if (s[a] < 0) out.vectors.set(seed, -s);
        break;
      }
    }
    visited[seed] = 1;
    std::deque<std::size_t> queue{seed};
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      const Index3 c = grid.coords(v);
      for (int a = 0; a < n; ++a) {
        for (int dd : {-1, 1}) {
          Index3 q = c;
          q[a] += dd;
          if (!grid.contains(q)) continue;
          const std::size_t qi = grid.index(q);
          if (!d.mask[qi] || visited[qi] || !out.reliable[qi]) continue;
          const Index3 qc = grid.coords(qi);
          double agreement = 0.0;
          const Vec vq = out.vectors.at(qi);
          for (int b = 0; b < n; ++b) {
            for (int e : {-1, 1}) {
              Index3 w = qc;
              w[b] += e;
              if (!grid.contains(w)) continue;
              const std::size_t wi = grid.index(w);
              if (visited[wi]) agreement += vq.dot(out.vectors.at(wi));
            }
          }
          if (agreement < 0.0) out.vectors.set(qi, -vq);
          visited[qi] = 1;
          queue.push_back(qi);
        }
      }
    }
  }
  return out;
}

double conformal_functional(const ScalarField& alpha, const VectorField& v, const MetricField& g, const MaskField& mask,
                            const MaskField* reliable) {
  require_same_grid(alpha.grid(), g.grid(), "conformal_functional");
  const VectorField omega = target_covector(v, g, mask, reliable);
  const VectorField dalpha = differential(alpha, mask);
  double total = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    if (!mask[x]) continue;
    const Mat gm = g.at(x);
    const Vec r = dalpha.at(x) - omega.at(x);
    total += r.dot(gm.ldlt().solve(r)) * std::sqrt(gm.determinant());
  }
  return total * g.grid().cell_volume();
}

SparseMatrix conformal_normal_matrix(const MetricField& g, const MaskField& mask) {
  const MaskedGradient mg = masked_gradient(g.grid(), mask);
  const SparseMatrix w = metric_weights(g, mg);
  SparseMatrix wd = w * mg.d;
  return SparseMatrix(mg.d.transpose() * wd);
}

ScalarField solve_alpha(const VectorField& v, const MetricField& g, const MaskField& mask, const MaskField* reliable,
                        const AlphaSolveSettings& settings, AlphaReport* report) {
  require_same_grid(v.grid(), g.grid(), "solve_alpha");
  require_same_grid(v.grid(), mask.grid(), "solve_alpha");
  mask.validate();
  const Grid& grid = g.grid();
  const int n = grid.dim();
  const MaskedGradient mg = masked_gradient(grid, mask);
  const SparseMatrix w = metric_weights(g, mg);
  const SparseMatrix wd = w * mg.d;
  const SparseMatrix normal = mg.d.transpose() * wd;

  const VectorField omega = target_covector(v, g, mask, reliable);
  Eigen::VectorXd om(mg.d.rows());
  for (std::size_t u = 0; u < mg.voxel_of_unknown.size(); ++u)
    for (int a = 0; a < n; ++a) om[static_cast<Eigen::Index>(u * n + a)] = omega.voxel(mg.voxel_of_unknown[u])[a];
  const Eigen::VectorXd rhs = wd.transpose() * om;

  CgSettings cg;
  cg.tolerance = settings.tolerance;
  cg.max_iterations = settings.max_iterations > 0
                          ? settings.max_iterations
                          : static_cast<int>(100.0 * std::sqrt(static_cast<double>(mg.voxel_of_unknown.size()))) + 10;
  CgReport rep;
  const Eigen::VectorXd x = conjugate_gradient(normal, rhs, cg, &rep, "conformal factor solve");

  ScalarField alpha(grid);
  for (std::size_t u = 0; u < mg.voxel_of_unknown.size(); ++u) alpha[mg.voxel_of_unknown[u]] = x[static_cast<Eigen::Index>(u)];
  remove_component_means(alpha, mask);

  if (report) {
    report->iterations = rep.iterations;
    report->relative_residual = rep.relative_residual;
    report->functional_before = conformal_functional(ScalarField(grid), v, g, mask, reliable);
    report->functional_after = conformal_functional(alpha, v, g, mask, reliable);
  }
  return alpha;
}

ScalarField solve_alpha(const TensorImage& d, const AlphaSolveSettings& settings, AlphaReport* report) {
  const MetricField g = inverse_tensor_metric(d);
  const PrincipalDirections pd = principal_eigenvector_field(d);
  return solve_alpha(pd.vectors, g, d.mask, &pd.reliable, settings, report);
}

ConnectomeMetric build_connectome_metric(const TensorImage& d, const AlphaSolveSettings& settings,
                                         AlphaReport* report) {
  ConnectomeMetric cm;
  cm.mask = d.mask;
  cm.g_tilde = inverse_tensor_metric(d);
  const PrincipalDirections pd = principal_eigenvector_field(d);
  cm.alpha = solve_alpha(pd.vectors, cm.g_tilde, d.mask, &pd.reliable, settings, report);
  cm.g_alpha = cm.g_tilde;
  for (std::size_t v = 0; v < cm.g_alpha.size(); ++v) {
    if (!d.mask[v]) continue;
    cm.g_alpha.set(v, std::exp(cm.alpha[v]) * cm.g_tilde.at(v));
  }
  cm.g_alpha.set_spd_flag(true);
  return cm;
}

}  // namespace rmatlas
