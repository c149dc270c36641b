#pragma once

#include "strb/march.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace strb::pipeline {

enum class Geometry { Channel, Bifurcation };
enum class Method { SrbTfo, StGrb, StPgrb };

std::string to_string(Geometry g);
std::string to_string(Method m);
Method parse_method(const std::string& s);

/// POD tolerances for one study level. Rows of the study table are labelled
/// by the velocity value.
struct Tolerance {
  double velocity = 1e-3;
  double pressure = 1e-3;
  double multiplier = 1e-3;
};

struct StudyConfig {
  Geometry geometry = Geometry::Channel;
  double length = 2.0;  // channel
  double height = 1.0;
  int nx = 16;
  int ny = 8;
  double h = 0.25;  // bifurcation mesh size

  double rho = 1.06;
  double mu = 3.5e-3;
  int n_in = 5;
  int n_out = 0;
  fom::FlowSplit split = fom::FlowSplit::UnitAndMu2;

  double period = 1.0;
  int steps = 500;
  fom::ParameterDomain domain;

  int n_train = 20;
  int n_test = 10;
  std::uint64_t seed = 20240601;

  std::vector<Tolerance> tolerances{{1e-3, 1e-3, 1e-3}, {1e-4, 1e-4, 1e-4}};
  double eps_t = 0.5;
  bool temporal_enrichment = true;
  std::vector<Method> methods{Method::SrbTfo, Method::StGrb, Method::StPgrb};

  int repetitions = 5;
  std::string output = "strb-out";

  [[nodiscard]] fom::TimeGrid grid() const { return {period, steps}; }
};

/// Throws ConfigError naming the offending key.
void validate(const StudyConfig& c);

/// Unknown keys are rejected. Missing keys keep their defaults.
StudyConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const StudyConfig& c);
StudyConfig load_config(const std::filesystem::path& path);

/// "a,b,c" with exactly three finite entries.
fom::Parameter parse_parameter(const std::string& text);

/// Uniform draws over the box: mt19937_64, 53-bit mantissa, one draw per
/// coordinate in the order mu0, mu1, mu2.
std::vector<fom::Parameter> sample_parameters(const fom::ParameterDomain& d, int n, std::uint64_t seed);

}  // namespace strb::pipeline
