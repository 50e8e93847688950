#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmatlas/atlas.hpp"
#include "rmatlas/synthetic.hpp"

namespace rmatlas::cli {

struct GeodesicSettings {
  std::vector<double> seed{0.0, 0.0};
  double max_length = 4.0;
  double dt = 0.01;
};

struct PipelineConfig {
  int grid_nodes = 64;
  double rho = 6.0;
  AnisotropyReading reading = AnisotropyReading::AxisLength;
  double max_offset = 0.2;
  std::vector<std::array<double, 4>> subjects;
  RegistrationConfig registration;
  int outer_iterations = 400;
  int inner_matching_iterations = 2;
  double solver_tolerance = 1e-8;
  double eps_pd = kEpsPD;
  GeodesicSettings geodesic;
  std::string output_directory = ".";

  /// Subject specs on the configured grid.
  std::vector<CubicFamilySpec> subject_specs() const;
  AtlasConfig atlas_config() const;
  nlohmann::json to_json() const;
};

/// Parses and validates; unknown keys and out-of-range values throw Error.
PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);

}  // namespace rmatlas::cli
