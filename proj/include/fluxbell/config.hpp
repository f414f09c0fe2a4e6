#pragma once

#include <optional>
#include <string>

#include "fluxbell/measurement.hpp"
#include "fluxbell/protocol.hpp"
#include "fluxbell/spectral.hpp"

namespace fluxbell {

// Every tunable of a run. Read from a JSON document whose keys are the
// dotted names below, either flat ("grid.points": 2049) or nested
// ({"grid": {"points": 2049}}). Times are in units of the tunneling period.
struct RunConfig {
  double mu = 9.6;
  double lambda = 1.536;
  GridSpec grid{};                       // grid.half_width, grid.points
  int basis_size = 40;                   // basis.size
  FilterSpec filter{};                   // filter.kind, filter.delta_phi
  OutcomeGrid outcomes{};                // outcome.half_width, outcome.points
  int prep_count = 16;                   // prep.count
  std::optional<double> prep_result;     // prep.result, default -phi_min
  double prep_offset_a = 1.0;            // prep.offset_a, delay from last preparation to t_a
  std::optional<double> init_center;     // init.center, default -phi_min
  std::optional<double> init_sigma;      // init.sigma, default (2 mu)^(-1/4)
  double scan_t_max = 2.0;               // scan.t_max_in_T
  int scan_steps = 48;                   // scan.steps
  bool representative_outcome = false;   // mode.representative_outcome
  int spatial_points = 181;              // spatial.points
  std::string output_spectrum;           // output.spectrum
  std::string output_prepare;            // output.prepare
  std::string output_scan;               // output.scan
  std::string output_regions;            // output.regions
  std::string output_spatial;            // output.spatial

  // Throws ConfigError naming the first out-of-domain field.
  void validate() const;

  PotentialParams params() const { return {mu, lambda}; }
  CorrelationMode mode() const {
    return representative_outcome ? CorrelationMode::representative : CorrelationMode::integrated;
  }
  InitialStateSpec initial_state_spec() const;
  double preparation_result() const;
};

// Unknown keys and wrongly typed values are ConfigErrors.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Flat JSON echo of the effective configuration, on one line.
std::string config_echo(const RunConfig& config);

}  // namespace fluxbell
