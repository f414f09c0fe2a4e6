#pragma once

// Entry points behind the command-line subcommands and the CSV/JSON files
// they exchange. CSV files carry '#'-prefixed provenance comments; numbers
// are written with 17 significant digits.

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "fluxbell/config.hpp"
#include "fluxbell/protocol.hpp"
#include "fluxbell/regions.hpp"

namespace fluxbell {

std::string format_real(double value);

struct Session {
  RunConfig config;
  std::shared_ptr<const SpectralBasis> basis;
  double period = 0.0;
};

// Builds the grid-converged spectrum for a validated config.
Session open_session(const RunConfig& config);

// n,E_n,converged
void write_spectrum(const Session& session, std::ostream& out);

// step,delta_phi_eff,success_norm2
void write_preparation(const Session& session, std::ostream& out);

struct ScanRun {
  ScanGrid grid;
  PreparedState prepared;
};
ScanRun run_scan(const Session& session, int threads);

// t_ab,t_bc,delta_p,u_bc,u_ab,u_ac,violation,distinguishable
void write_scan(const Session& session, const ScanGrid& grid, std::ostream& out);

// A scan CSV read back from disk.
struct ScanTable {
  std::vector<double> t_ab_axis;
  std::vector<double> t_bc_axis;
  Grid2D<double> delta_p, u_bc, u_ab, u_ac;
  Mask violation, distinguishable;
  std::optional<double> period;  // from the "# tunneling_period:" comment
};

// Throws FormatError on malformed input.
ScanTable read_scan(std::istream& in);

// Keys violation_regions, distinguishable_regions, intersection_cells, verdict.
nlohmann::json regions_json(const ScanTable& table);

// theta,phi,delta_p
void write_spatial(int points, std::ostream& out);

}  // namespace fluxbell
