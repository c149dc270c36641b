#include "strb/config.hpp"

#include "strb/error.hpp"
#include "strb/io.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace strb::pipeline {

using nlohmann::json;

std::string to_string(Geometry g) { return g == Geometry::Channel ? "channel" : "bifurcation2d"; }

std::string to_string(Method m) {
  switch (m) {
    case Method::SrbTfo: return "srbtfo";
    case Method::StGrb: return "stgrb";
    case Method::StPgrb: return "stpgrb";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "srbtfo") return Method::SrbTfo;
  if (s == "stgrb") return Method::StGrb;
  if (s == "stpgrb") return Method::StPgrb;
  throw ConfigError("unknown method '" + s + "' (expected srbtfo, stgrb or stpgrb)");
}

namespace {

std::string split_name(fom::FlowSplit s) { return s == fom::FlowSplit::UnitAndMu2 ? "unit_mu2" : "mu2_complement"; }

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown config key '" + where + k + "'");
}

Tolerance tolerance_from_json(const json& j) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return {v, v, v};
  }
  check_keys(j, {"velocity", "pressure", "multiplier"}, "tolerances[].");
  return {get<double>(j, "velocity"), get<double>(j, "pressure"), get<double>(j, "multiplier")};
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool in_unit(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

void validate(const StudyConfig& c) {
  require(c.length > 0 && c.height > 0, "channel length and height must be positive");
  require(c.nx >= 1 && c.ny >= 1, "mesh subdivisions must be at least 1");
  require(c.h > 0 && c.h <= 1.0, "bifurcation mesh size must lie in (0, 1]");
  require(c.rho > 0 && c.mu > 0, "rho and mu must be positive");
  require(c.n_in >= 0 && c.n_out >= 0, "multiplier degrees must be non-negative");
  require(c.period > 0, "period must be positive");
  require(c.steps >= 3, "steps must be at least 3");
  for (int i = 0; i < 3; ++i)
    require(std::isfinite(c.domain.lower[i]) && std::isfinite(c.domain.upper[i]) &&
                c.domain.lower[i] <= c.domain.upper[i],
            "parameter domain bounds must be finite with lower <= upper");
  require(c.n_train >= 1 && c.n_test >= 1, "n_train and n_test must be at least 1");
  require(!c.tolerances.empty(), "at least one tolerance level is required");
  for (const auto& t : c.tolerances)
    require(in_unit(t.velocity) && in_unit(t.pressure) && in_unit(t.multiplier), "tolerances must lie in (0,1)");
  require(in_unit(c.eps_t), "eps_t must lie in (0,1)");
  require(!c.methods.empty(), "at least one method is required");
  require(c.repetitions >= 1, "repetitions must be at least 1");
  require(!c.output.empty(), "output directory must be set");
}

StudyConfig config_from_json(const json& j) {
  check_keys(j,
             {"geometry", "mesh", "rho", "mu", "n_in", "n_out", "split", "period", "steps", "domain", "n_train",
              "n_test", "seed", "tolerances", "eps_t", "temporal_enrichment", "methods", "repetitions", "output"},
             "");
  StudyConfig c;
  if (j.contains("geometry")) {
    const auto g = get<std::string>(j, "geometry");
    if (g == "channel")
      c.geometry = Geometry::Channel;
    else if (g == "bifurcation2d")
      c.geometry = Geometry::Bifurcation;
    else
      throw ConfigError("geometry must be 'channel' or 'bifurcation2d'");
  }
  if (j.contains("mesh")) {
    const json& m = j["mesh"];
    check_keys(m, {"length", "height", "nx", "ny", "h"}, "mesh.");
    if (m.contains("length")) c.length = get<double>(m, "length");
    if (m.contains("height")) c.height = get<double>(m, "height");
    if (m.contains("nx")) c.nx = get<int>(m, "nx");
    if (m.contains("ny")) c.ny = get<int>(m, "ny");
    if (m.contains("h")) c.h = get<double>(m, "h");
  }
  if (j.contains("rho")) c.rho = get<double>(j, "rho");
  if (j.contains("mu")) c.mu = get<double>(j, "mu");
  if (j.contains("n_in")) c.n_in = get<int>(j, "n_in");
  if (j.contains("n_out")) c.n_out = get<int>(j, "n_out");
  if (j.contains("split")) {
    const auto s = get<std::string>(j, "split");
    if (s == "unit_mu2")
      c.split = fom::FlowSplit::UnitAndMu2;
    else if (s == "mu2_complement")
      c.split = fom::FlowSplit::Mu2AndComplement;
    else
      throw ConfigError("split must be 'unit_mu2' or 'mu2_complement'");
  }
  if (j.contains("period")) c.period = get<double>(j, "period");
  if (j.contains("steps")) c.steps = get<int>(j, "steps");
  if (j.contains("domain")) {
    const json& d = j["domain"];
    check_keys(d, {"lower", "upper"}, "domain.");
    if (d.contains("lower")) c.domain.lower = get<std::array<double, 3>>(d, "lower");
    if (d.contains("upper")) c.domain.upper = get<std::array<double, 3>>(d, "upper");
  }
  if (j.contains("n_train")) c.n_train = get<int>(j, "n_train");
  if (j.contains("n_test")) c.n_test = get<int>(j, "n_test");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_array()) throw ConfigError("tolerances must be an array");
    c.tolerances.clear();
    for (const auto& t : j["tolerances"]) c.tolerances.push_back(tolerance_from_json(t));
  }
  if (j.contains("eps_t")) c.eps_t = get<double>(j, "eps_t");
  if (j.contains("temporal_enrichment")) c.temporal_enrichment = get<bool>(j, "temporal_enrichment");
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : get<std::vector<std::string>>(j, "methods")) c.methods.push_back(parse_method(m));
  }
  if (j.contains("repetitions")) c.repetitions = get<int>(j, "repetitions");
  if (j.contains("output")) c.output = get<std::string>(j, "output");
  validate(c);
  return c;
}

nlohmann::ordered_json config_to_json(const StudyConfig& c) {
  nlohmann::ordered_json j;
  j["geometry"] = to_string(c.geometry);
  j["mesh"] = {{"length", c.length}, {"height", c.height}, {"nx", c.nx}, {"ny", c.ny}, {"h", c.h}};
  j["rho"] = c.rho;
  j["mu"] = c.mu;
  j["n_in"] = c.n_in;
  j["n_out"] = c.n_out;
  j["split"] = split_name(c.split);
  j["period"] = c.period;
  j["steps"] = c.steps;
  j["domain"] = {{"lower", c.domain.lower}, {"upper", c.domain.upper}};
  j["n_train"] = c.n_train;
  j["n_test"] = c.n_test;
  j["seed"] = c.seed;
  j["tolerances"] = nlohmann::ordered_json::array();
  for (const auto& t : c.tolerances)
    j["tolerances"].push_back({{"velocity", t.velocity}, {"pressure", t.pressure}, {"multiplier", t.multiplier}});
  j["eps_t"] = c.eps_t;
  j["temporal_enrichment"] = c.temporal_enrichment;
  j["methods"] = nlohmann::ordered_json::array();
  for (auto m : c.methods) j["methods"].push_back(to_string(m));
  j["repetitions"] = c.repetitions;
  j["output"] = c.output;
  return j;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const Error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

fom::Parameter parse_parameter(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("parameter entry '" + item + "' is not a number");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(x))
      throw ConfigError("parameter entry '" + item + "' is not a finite number");
    v.push_back(x);
  }
  if (v.size() != 3)
    throw ConfigError("parameter needs exactly 3 comma-separated entries (mu0,mu1,mu2), got " + std::to_string(v.size()));
  return {v[0], v[1], v[2]};
}

std::vector<fom::Parameter> sample_parameters(const fom::ParameterDomain& d, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](int i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return d.lower[i] + (d.upper[i] - d.lower[i]) * u;
  };
  std::vector<fom::Parameter> out;
  for (int k = 0; k < n; ++k) {
    fom::Parameter p;
    p.mu0 = uniform(0);
    p.mu1 = uniform(1);
    p.mu2 = uniform(2);
    out.push_back(p);
  }
  return out;
}

}  // namespace strb::pipeline
