#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmatlas/geodesic.hpp"

namespace rmatlas::cli {

/// Writes text via a temporary file and rename.
void write_text_atomic(const std::string& path, const std::string& text);

nlohmann::json curve_to_json(const Curve& c);
Curve curve_from_json(const nlohmann::json& j);

/// "x,y[,z]" -> vector; throws Error on malformed input.
Vec parse_point(const std::string& text);

struct SynthOptions {
  std::string config;
  std::string out_dir;
};
nlohmann::json cmd_synth(const SynthOptions& o);

struct EstimateOptions {
  std::string tensor;
  std::string mask;
  std::string out_prefix;
  double tolerance = 1e-8;
};
nlohmann::json cmd_estimate_metric(const EstimateOptions& o);

struct CurveOptions {
  std::string field;  // metric (geodesic) or vector (integral curve)
  std::string mask;
  std::string seed;
  std::string direction;
  double max_length = 4.0;
  double dt = 0.01;
  bool both_ways = false;
  std::string out;
};
nlohmann::json cmd_geodesic(const CurveOptions& o);
nlohmann::json cmd_integral_curve(const CurveOptions& o);

struct DistanceOptions {
  std::string a;
  std::string b;
  std::string mask;
};
nlohmann::json cmd_distance(const DistanceOptions& o);

struct MeanOptions {
  std::vector<std::string> inputs;
  std::string mask;
  std::string out;
};
nlohmann::json cmd_mean(const MeanOptions& o);

struct RegisterOptions {
  std::string fixed;
  std::string moving;
  std::string mask;
  std::string config;
  std::optional<int> max_iter;
  std::string out;
};
nlohmann::json cmd_register(const RegisterOptions& o);

struct AtlasOptions {
  std::string config;
  std::vector<std::string> metrics;
  std::vector<std::string> masks;
  std::string out_dir;
  std::optional<int> outer_iterations;
};
nlohmann::json cmd_atlas(const AtlasOptions& o);

nlohmann::json cmd_info(const std::string& path);

struct RenderCmdOptions {
  std::string mask;
  std::string tensor;
  std::string metric;
  std::vector<std::string> curves;
  std::string title;
  std::string out;
};
nlohmann::json cmd_render(const RenderCmdOptions& o);

/// Full command line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace rmatlas::cli
