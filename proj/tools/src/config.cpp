#include "rmatlas_cli/config.hpp"

#include <fstream>
#include <set>

#include "rmatlas/error.hpp"

namespace rmatlas::cli {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw Error("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw Error("config: unknown key '" + where + "." + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error("config: '" + where + "." + key + "' has the wrong type");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error("config: " + what);
}

const char* reading_name(AnisotropyReading r) { return r == AnisotropyReading::AxisLength ? "axis-length" : "eigenvalue"; }

}  // namespace

std::vector<CubicFamilySpec> PipelineConfig::subject_specs() const {
  const Grid grid = default_synthetic_grid(grid_nodes);
  std::vector<CubicFamilySpec> out;
  if (subjects.empty()) {
    out = default_subject_family(grid, rho, reading);
  } else {
    for (const auto& c : subjects) {
      CubicFamilySpec s;
      s.coeffs = c;
      s.grid = grid;
      s.rho = rho;
      s.reading = reading;
      out.push_back(s);
    }
  }
  for (auto& s : out) s.max_offset = max_offset;
  return out;
}

AtlasConfig PipelineConfig::atlas_config() const {
  AtlasConfig a;
  a.outer_iterations = outer_iterations;
  a.inner_matching_iterations = inner_matching_iterations;
  a.registration = registration;
  return a;
}

json PipelineConfig::to_json() const {
  json j;
  j["grid"] = {{"nodes", grid_nodes}};
  json subj = json::array();
  for (const auto& c : subjects) subj.push_back(c);
  j["synthetic"] = {{"rho", rho}, {"reading", reading_name(reading)}, {"max_offset", max_offset}, {"subjects", subj}};
  j["registration"] = {{"lambda", registration.lambda},
                       {"epsilon", registration.epsilon},
                       {"epsilon_policy", registration.epsilon_policy == EpsilonPolicy::Fixed ? "fixed" : "energy-adaptive"},
                       {"max_iter", registration.max_iter},
                       {"max_halvings", registration.max_halvings}};
  j["atlas"] = {{"outer_iterations", outer_iterations}, {"inner_matching_iterations", inner_matching_iterations}};
  j["solver"] = {{"tolerance", solver_tolerance}, {"eps_pd", eps_pd}};
  j["geodesic"] = {{"seed", geodesic.seed}, {"max_length", geodesic.max_length}, {"dt", geodesic.dt}};
  j["output"] = {{"directory", output_directory}};
  return j;
}

PipelineConfig parse_config(const json& j) {
  PipelineConfig c;
  check_keys(j, "<root>", {"grid", "synthetic", "registration", "atlas", "solver", "geodesic", "output"});
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, "grid", {"nodes"});
    read(g, "nodes", c.grid_nodes, "grid");
    require(c.grid_nodes >= 8, "grid.nodes must be >= 8");
  }
  if (j.contains("synthetic")) {
    const json& s = j["synthetic"];
    check_keys(s, "synthetic", {"rho", "reading", "max_offset", "subjects"});
    read(s, "rho", c.rho, "synthetic");
    read(s, "max_offset", c.max_offset, "synthetic");
    read(s, "subjects", c.subjects, "synthetic");
    std::string reading = reading_name(c.reading);
    read(s, "reading", reading, "synthetic");
    require(reading == "axis-length" || reading == "eigenvalue",
            "synthetic.reading must be 'axis-length' or 'eigenvalue'");
    c.reading = reading == "axis-length" ? AnisotropyReading::AxisLength : AnisotropyReading::Eigenvalue;
    require(c.rho >= 1.0, "synthetic.rho must be >= 1");
    require(c.max_offset > 0.0, "synthetic.max_offset must be > 0");
  }
  if (j.contains("registration")) {
    const json& r = j["registration"];
    check_keys(r, "registration", {"lambda", "epsilon", "epsilon_policy", "max_iter", "max_halvings"});
    read(r, "lambda", c.registration.lambda, "registration");
    read(r, "epsilon", c.registration.epsilon, "registration");
    read(r, "max_iter", c.registration.max_iter, "registration");
    read(r, "max_halvings", c.registration.max_halvings, "registration");
    std::string policy = "energy-adaptive";
    read(r, "epsilon_policy", policy, "registration");
    require(policy == "fixed" || policy == "energy-adaptive",
            "registration.epsilon_policy must be 'fixed' or 'energy-adaptive'");
    c.registration.epsilon_policy = policy == "fixed" ? EpsilonPolicy::Fixed : EpsilonPolicy::EnergyAdaptive;
  }
  if (j.contains("atlas")) {
    const json& a = j["atlas"];
    check_keys(a, "atlas", {"outer_iterations", "inner_matching_iterations"});
    read(a, "outer_iterations", c.outer_iterations, "atlas");
    read(a, "inner_matching_iterations", c.inner_matching_iterations, "atlas");
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    check_keys(s, "solver", {"tolerance", "eps_pd"});
    read(s, "tolerance", c.solver_tolerance, "solver");
    read(s, "eps_pd", c.eps_pd, "solver");
    require(c.solver_tolerance > 0.0, "solver.tolerance must be > 0");
    require(c.eps_pd > 0.0, "solver.eps_pd must be > 0");
  }
  if (j.contains("geodesic")) {
    const json& g = j["geodesic"];
    check_keys(g, "geodesic", {"seed", "max_length", "dt"});
    read(g, "seed", c.geodesic.seed, "geodesic");
    read(g, "max_length", c.geodesic.max_length, "geodesic");
    read(g, "dt", c.geodesic.dt, "geodesic");
    require(c.geodesic.seed.size() == 2, "geodesic.seed must have two coordinates");
    require(c.geodesic.max_length > 0.0 && c.geodesic.dt > 0.0, "geodesic.max_length and geodesic.dt must be > 0");
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, "output", {"directory"});
    read(o, "directory", c.output_directory, "output");
  }
  c.registration.solver_tolerance = c.solver_tolerance;
  c.registration.validate();
  c.atlas_config().validate();
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw Error("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace rmatlas::cli
