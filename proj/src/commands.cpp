#include "fluxbell/commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "fluxbell/error.hpp"

namespace fluxbell {

namespace {

constexpr const char* kScanColumns[] = {"t_ab", "t_bc", "delta_p", "u_bc",
                                        "u_ab", "u_ac", "violation", "distinguishable"};

MeasurementModel make_model(const Session& s) {
  return MeasurementModel(s.basis, s.config.filter, s.config.outcomes);
}

void write_provenance(const Session& s, const char* kind, std::ostream& out) {
  out << "# fluxbell " << kind << "\n";
  out << "# config: " << config_echo(s.config) << "\n";
  out << "# tunneling_period: " << format_real(s.period) << "\n";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_real(const std::string& s, int line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw FormatError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
  return v;
}

nlohmann::json region_json(const Region& r, const ScanTable& t) {
  nlohmann::json j;
  j["label"] = r.label;
  j["area"] = r.area;
  j["rows"] = {r.row_min, r.row_max};
  j["cols"] = {r.col_min, r.col_max};
  j["t_ab_range"] = {t.t_ab_axis[r.row_min], t.t_ab_axis[r.row_max]};
  j["t_bc_range"] = {t.t_bc_axis[r.col_min], t.t_bc_axis[r.col_max]};
  j["centroid"] = {r.centroid_row, r.centroid_col};
  j["orientation"] = to_string(r.orientation);
  if (std::isfinite(r.slope)) {
    j["slope"] = r.slope;
  } else {
    j["slope"] = nullptr;
  }
  return j;
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Session open_session(const RunConfig& config) {
  config.validate();
  Session s{config, nullptr, 0.0};
  s.basis = std::make_shared<const SpectralBasis>(
      build_converged_basis(config.params(), config.grid, config.basis_size));
  s.period = tunneling_period(*s.basis);
  return s;
}

void write_spectrum(const Session& s, std::ostream& out) {
  write_provenance(s, "spectrum", out);
  out << "n,E_n,converged\n";
  const auto& e = s.basis->energies();
  for (int n = 0; n < s.basis->truncation(); ++n) {
    out << (n + 1) << ',' << format_real(e[n]) << ',' << (s.basis->converged()[n] ? 1 : 0) << '\n';
  }
}

void write_preparation(const Session& s, std::ostream& out) {
  const MeasurementModel model = make_model(s);
  const StateVector init = initial_state(*s.basis, s.config.initial_state_spec());
  const PreparedState prep = prepare_state(
      model, init, {s.config.prep_count, s.period, s.config.preparation_result()});
  write_provenance(s, "prepare", out);
  out << "step,delta_phi_eff,success_norm2\n";
  for (const auto& st : prep.trace) {
    out << st.step << ',' << format_real(st.delta_phi_eff) << ',' << format_real(st.success_norm2)
        << '\n';
  }
}

ScanRun run_scan(const Session& s, int threads) {
  const MeasurementModel model = make_model(s);
  const StateVector init = initial_state(*s.basis, s.config.initial_state_spec());
  ScanRun run;
  run.prepared = prepare_state(model, init,
                               {s.config.prep_count, s.period, s.config.preparation_result()});
  ScanConfig sc;
  sc.t_max = s.config.scan_t_max * s.period;
  sc.steps = s.config.scan_steps;
  sc.t_offset_a = s.config.prep_offset_a * s.period;
  sc.mode = s.config.mode();
  sc.threads = threads;
  run.grid = scan(model, run.prepared.state, sc);
  return run;
}

void write_scan(const Session& s, const ScanGrid& g, std::ostream& out) {
  write_provenance(s, "scan", out);
  out << "# delta_l: " << format_real(s.basis->params().delta_l()) << "\n";
  out << "# steps: " << g.t_ab_axis.size() << "\n";
  for (std::size_t c = 0; c < std::size(kScanColumns); ++c) {
    out << (c ? "," : "") << kScanColumns[c];
  }
  out << '\n';
  const int n = static_cast<int>(g.t_ab_axis.size());
  const int m = static_cast<int>(g.t_bc_axis.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      out << format_real(g.t_ab_axis[i]) << ',' << format_real(g.t_bc_axis[j]) << ','
          << format_real(g.delta_p(i, j)) << ',' << format_real(g.delta_phi_eff_bc(i, j)) << ','
          << format_real(g.delta_phi_eff_ab(i, j)) << ',' << format_real(g.delta_phi_eff_ac(i, j))
          << ',' << int(g.violation(i, j)) << ',' << int(g.distinguishable(i, j)) << '\n';
    }
  }
}

ScanTable read_scan(std::istream& in) {
  ScanTable t;
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  std::vector<std::array<double, 8>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      constexpr std::string_view key = "# tunneling_period:";
      if (line.compare(0, key.size(), key) == 0) {
        std::string v = line.substr(key.size());
        v.erase(0, v.find_first_not_of(' '));
        t.period = parse_real(v, line_no);
      }
      continue;
    }
    if (header.empty()) {
      header = split(line, ',');
      if (header.size() != std::size(kScanColumns)) {
        throw FormatError("line " + std::to_string(line_no) + ": expected 8 columns in header");
      }
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] != kScanColumns[c]) {
          throw FormatError("line " + std::to_string(line_no) + ": unexpected column '" +
                            header[c] + "', expected '" + kScanColumns[c] + "'");
        }
      }
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    std::array<double, 8> r{};
    for (std::size_t c = 0; c < 8; ++c) r[c] = parse_real(fields[c], line_no);
    for (int c : {6, 7}) {
      if (r[c] != 0.0 && r[c] != 1.0) {
        throw FormatError("line " + std::to_string(line_no) + ": mask column must be 0 or 1");
      }
    }
    rows.push_back(r);
  }
  if (header.empty()) throw FormatError("missing header line");
  if (rows.empty()) throw FormatError("no data rows");

  // Raster order: t_ab outer, t_bc inner.
  for (const auto& r : rows) {
    if (t.t_ab_axis.empty() || t.t_ab_axis.back() != r[0]) t.t_ab_axis.push_back(r[0]);
  }
  for (const auto& r : rows) {
    if (r[0] != rows.front()[0]) break;
    t.t_bc_axis.push_back(r[1]);
  }
  for (const auto* axis : {&t.t_ab_axis, &t.t_bc_axis}) {
    for (std::size_t k = 1; k < axis->size(); ++k) {
      if (!((*axis)[k] > (*axis)[k - 1])) throw FormatError("time axes must be increasing");
    }
  }
  const std::size_t n = t.t_ab_axis.size(), m = t.t_bc_axis.size();
  if (n * m != rows.size()) throw FormatError("rows do not form a rectangular t_ab x t_bc grid");
  t.delta_p = Grid2D<double>(n, m);
  t.u_bc = Grid2D<double>(n, m);
  t.u_ab = Grid2D<double>(n, m);
  t.u_ac = Grid2D<double>(n, m);
  t.violation = Mask(n, m);
  t.distinguishable = Mask(n, m);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const int i = static_cast<int>(k / m), j = static_cast<int>(k % m);
    const auto& r = rows[k];
    if (r[0] != t.t_ab_axis[i] || r[1] != t.t_bc_axis[j]) {
      throw FormatError("row " + std::to_string(k + 1) + " is out of raster order");
    }
    t.delta_p(i, j) = r[2];
    t.u_bc(i, j) = r[3];
    t.u_ab(i, j) = r[4];
    t.u_ac(i, j) = r[5];
    t.violation(i, j) = r[6] != 0.0;
    t.distinguishable(i, j) = r[7] != 0.0;
  }
  return t;
}

nlohmann::json regions_json(const ScanTable& t) {
  const RegionReport rep = intersection_report(t.violation, t.distinguishable);
  nlohmann::json j;
  j["violation_regions"] = nlohmann::json::array();
  for (const auto& r : rep.violation_regions) j["violation_regions"].push_back(region_json(r, t));
  j["distinguishable_regions"] = nlohmann::json::array();
  for (const auto& r : rep.distinguishable_regions) {
    j["distinguishable_regions"].push_back(region_json(r, t));
  }
  j["violation_cells"] = rep.violation_cells;
  j["distinguishable_cells"] = rep.distinguishable_cells;
  j["intersection_cells"] = rep.intersection_cells;
  j["verdict"] = to_string(rep.verdict);
  if (t.period) j["tunneling_period"] = *t.period;
  return j;
}

void write_spatial(int points, std::ostream& out) {
  const auto surface = spatial_surface(points);
  out << "# fluxbell spatial\n";
  out << "# points: " << points << "\n";
  out << "theta,phi,delta_p\n";
  for (const auto& p : surface) {
    out << format_real(p.theta) << ',' << format_real(p.phi_angle) << ',' << format_real(p.delta_p)
        << '\n';
  }
}

}  // namespace fluxbell
