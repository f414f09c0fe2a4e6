#include "fluxbell/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fluxbell/error.hpp"

namespace fluxbell {

namespace {

using json = nlohmann::json;

void flatten(const json& node, const std::string& prefix, std::map<std::string, json>& out) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(*it, key, out);
    } else {
      out[key] = *it;
    }
  }
}

double as_real(const std::string& key, const json& v) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

int as_int(const std::string& key, const json& v) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 1e9) return static_cast<int>(d);
  }
  throw ConfigError(key, "expected an integer");
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

using Setter = std::function<void(RunConfig&, const std::string&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"mu", [](RunConfig& c, const std::string& k, const json& v) { c.mu = as_real(k, v); }},
      {"lambda", [](RunConfig& c, const std::string& k, const json& v) { c.lambda = as_real(k, v); }},
      {"grid.half_width",
       [](RunConfig& c, const std::string& k, const json& v) { c.grid.half_width = as_real(k, v); }},
      {"grid.points",
       [](RunConfig& c, const std::string& k, const json& v) { c.grid.n_points = as_int(k, v); }},
      {"basis.size",
       [](RunConfig& c, const std::string& k, const json& v) { c.basis_size = as_int(k, v); }},
      {"filter.kind",
       [](RunConfig& c, const std::string& k, const json& v) {
         const std::string s = as_string(k, v);
         if (s == "gaussian") {
           c.filter.kind = FilterKind::gaussian;
         } else if (s == "box") {
           c.filter.kind = FilterKind::box;
         } else {
           throw ConfigError(k, "expected \"gaussian\" or \"box\"");
         }
       }},
      {"filter.delta_phi",
       [](RunConfig& c, const std::string& k, const json& v) { c.filter.delta_phi = as_real(k, v); }},
      {"outcome.half_width",
       [](RunConfig& c, const std::string& k, const json& v) {
         c.outcomes.half_width = as_real(k, v);
       }},
      {"outcome.points",
       [](RunConfig& c, const std::string& k, const json& v) { c.outcomes.points = as_int(k, v); }},
      {"prep.count",
       [](RunConfig& c, const std::string& k, const json& v) { c.prep_count = as_int(k, v); }},
      {"prep.result",
       [](RunConfig& c, const std::string& k, const json& v) { c.prep_result = as_real(k, v); }},
      {"prep.offset_a",
       [](RunConfig& c, const std::string& k, const json& v) { c.prep_offset_a = as_real(k, v); }},
      {"init.center",
       [](RunConfig& c, const std::string& k, const json& v) { c.init_center = as_real(k, v); }},
      {"init.sigma",
       [](RunConfig& c, const std::string& k, const json& v) { c.init_sigma = as_real(k, v); }},
      {"scan.t_max_in_T",
       [](RunConfig& c, const std::string& k, const json& v) { c.scan_t_max = as_real(k, v); }},
      {"scan.steps",
       [](RunConfig& c, const std::string& k, const json& v) { c.scan_steps = as_int(k, v); }},
      {"mode.representative_outcome",
       [](RunConfig& c, const std::string& k, const json& v) {
         c.representative_outcome = as_bool(k, v);
       }},
      {"spatial.points",
       [](RunConfig& c, const std::string& k, const json& v) { c.spatial_points = as_int(k, v); }},
      {"output.spectrum",
       [](RunConfig& c, const std::string& k, const json& v) { c.output_spectrum = as_string(k, v); }},
      {"output.prepare",
       [](RunConfig& c, const std::string& k, const json& v) { c.output_prepare = as_string(k, v); }},
      {"output.scan",
       [](RunConfig& c, const std::string& k, const json& v) { c.output_scan = as_string(k, v); }},
      {"output.regions",
       [](RunConfig& c, const std::string& k, const json& v) { c.output_regions = as_string(k, v); }},
      {"output.spatial",
       [](RunConfig& c, const std::string& k, const json& v) { c.output_spatial = as_string(k, v); }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  const PotentialParams p = params();  // mu, lambda
  grid.validate();
  if (!(grid.half_width > 2.0 * p.phi_min())) {
    throw ConfigError("grid.half_width", "must exceed twice phi_min = " + std::to_string(p.phi_min()));
  }
  if (basis_size < 2) throw ConfigError("basis.size", "must be at least 2");
  if (basis_size >= grid.n_points) throw ConfigError("basis.size", "must be below grid.points");
  filter.validate();
  outcomes.validate();
  if (outcomes.half_width < 3.0 * p.phi_min()) {
    throw ConfigError("outcome.half_width", "must be at least 3 phi_min");
  }
  if (prep_count < 0) throw ConfigError("prep.count", "must be non-negative");
  if (prep_result && !(std::abs(*prep_result) <= grid.half_width)) {
    throw ConfigError("prep.result", "must lie inside the grid span");
  }
  if (!(prep_offset_a >= 0.0) || !std::isfinite(prep_offset_a)) {
    throw ConfigError("prep.offset_a", "must be non-negative");
  }
  initial_state_spec().validate(grid);
  if (!(scan_t_max > 0.0) || scan_t_max > 4.0) {
    throw ConfigError("scan.t_max_in_T", "must lie in (0, 4]");
  }
  if (scan_steps < 2) throw ConfigError("scan.steps", "must be at least 2");
  if (spatial_points < 2) throw ConfigError("spatial.points", "must be at least 2");
}

InitialStateSpec RunConfig::initial_state_spec() const {
  InitialStateSpec s = InitialStateSpec::defaults(params());
  if (init_center) s.center = *init_center;
  if (init_sigma) s.sigma = *init_sigma;
  return s;
}

double RunConfig::preparation_result() const {
  return prep_result ? *prep_result : -params().phi_min();
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config", "top level must be an object");
  std::map<std::string, json> flat;
  flatten(doc, "", flat);
  RunConfig cfg;
  const auto& table = setters();
  for (const auto& [key, value] : flat) {
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, "unknown configuration key");
    it->second(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_echo(const RunConfig& c) {
  json j;
  j["mu"] = c.mu;
  j["lambda"] = c.lambda;
  j["grid.half_width"] = c.grid.half_width;
  j["grid.points"] = c.grid.n_points;
  j["basis.size"] = c.basis_size;
  j["filter.kind"] = to_string(c.filter.kind);
  j["filter.delta_phi"] = c.filter.delta_phi;
  j["outcome.half_width"] = c.outcomes.half_width;
  j["outcome.points"] = c.outcomes.points;
  j["prep.count"] = c.prep_count;
  j["prep.result"] = c.preparation_result();
  j["prep.offset_a"] = c.prep_offset_a;
  const InitialStateSpec init = c.initial_state_spec();
  j["init.center"] = init.center;
  j["init.sigma"] = init.sigma;
  j["scan.t_max_in_T"] = c.scan_t_max;
  j["scan.steps"] = c.scan_steps;
  j["mode.representative_outcome"] = c.representative_outcome;
  return j.dump();
}

}  // namespace fluxbell
