#include "rmatlas/spd.hpp"

#include <cmath>
#include <string>

#include "rmatlas/error.hpp"

namespace rmatlas {

namespace {

const char* name_of(MatrixFunction fn) {
  switch (fn) {
    case MatrixFunction::Log: return "log";
    case MatrixFunction::Exp: return "exp";
    case MatrixFunction::Sqrt: return "sqrt";
    case MatrixFunction::Inverse: return "inverse";
    case MatrixFunction::InverseSqrt: return "inverse sqrt";
  }
  return "?";
}

}  // namespace

Mat matrix_function(const Mat& a, MatrixFunction fn) {
  const SymEig e = sym_eig(a);
  if (fn != MatrixFunction::Exp && e.values.minCoeff() < kEpsPD)
    throw Error(std::string("matrix ") + name_of(fn) + " of a non positive-definite matrix");
  switch (fn) {
    case MatrixFunction::Log: return sym_apply(e, [](double x) { return std::log(x); });
    case MatrixFunction::Exp: return sym_apply(e, [](double x) { return std::exp(x); });
    case MatrixFunction::Sqrt: return sym_apply(e, [](double x) { return std::sqrt(x); });
    case MatrixFunction::Inverse: return sym_apply(e, [](double x) { return 1.0 / x; });
    case MatrixFunction::InverseSqrt: return sym_apply(e, [](double x) { return 1.0 / std::sqrt(x); });
  }
  return a;
}

MetricField pointwise_matrix_map(const MetricField& field, MatrixFunction fn) {
  MetricField out(field.grid());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Mat a = field.at(i);
    if (fn != MatrixFunction::Exp && !is_spd(a))
      throw NotPositiveDefinite(i, std::string("matrix ") + name_of(fn) + " needs a positive-definite input");
    out.set(i, matrix_function(a, fn));
  }
  out.set_spd_flag(fn != MatrixFunction::Log);
  return out;
}

ScalarField volume_density(const MetricField& g) {
  ScalarField out(g.grid());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const SymEig e = sym_eig(g.at(i));
    if (e.values.minCoeff() < kEpsPD) throw NotPositiveDefinite(i, "volume density of a non positive-definite metric");
    double v = 1.0;
    for (int k = 0; k < e.values.size(); ++k) v *= std::sqrt(e.values[k]);
    out[i] = v;
  }
  return out;
}

bool is_spd(const Mat& a, double eps_pd) {
  if (!a.allFinite()) return false;
  return sym_eig(a).values.minCoeff() >= eps_pd;
}

Mat spd_project(const Mat& a, double eps_pd) {
  const SymEig e = sym_eig(a);
  if (e.values.minCoeff() >= eps_pd) return a;
  return sym_apply(e, [eps_pd](double x) { return x < eps_pd ? eps_pd : x; });
}

MetricField spd_project(const MetricField& field, double eps_pd) {
  MetricField out = field;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Mat a = field.at(i);
    const SymEig e = sym_eig(a);
    if (e.values.minCoeff() >= eps_pd) continue;
    out.set(i, sym_apply(e, [eps_pd](double x) { return x < eps_pd ? eps_pd : x; }));
  }
  out.set_spd_flag(true);
  return out;
}

bool all_spd(const MetricField& field, const MaskField& mask, double eps_pd) {
  require_same_grid(field.grid(), mask.grid(), "all_spd");
  for (std::size_t i = 0; i < field.size(); ++i)
    if (mask[i] && !is_spd(field.at(i), eps_pd)) return false;
  return true;
}

void require_spd(const MetricField& field, const MaskField& mask, const char* what) {
  require_same_grid(field.grid(), mask.grid(), what);
  for (std::size_t i = 0; i < field.size(); ++i)
    if (mask[i] && !is_spd(field.at(i)))
      throw NotPositiveDefinite(i, std::string(what) + ": metric is not positive-definite");
}

}  // namespace rmatlas
