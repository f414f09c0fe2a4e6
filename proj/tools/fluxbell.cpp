// fluxbell: spectrum | prepare | scan | regions | spatial
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
// 3 I/O or format error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "fluxbell/commands.hpp"
#include "fluxbell/error.hpp"

namespace {

using namespace fluxbell;

struct Options {
  std::string config_path;
  std::string out_path;
  int threads = 0;
  std::optional<double> dphi;
  std::string mode;
  std::string input;  // regions
};

RunConfig resolve_config(const Options& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  if (o.dphi) cfg.filter.delta_phi = *o.dphi;
  if (o.mode == "representative") {
    cfg.representative_outcome = true;
  } else if (o.mode == "integrated") {
    cfg.representative_outcome = false;
  } else if (!o.mode.empty()) {
    throw ConfigError("--mode", "expected representative or integrated");
  }
  cfg.validate();
  return cfg;
}

// Writes through `emit` to --out, else the configured path, else stdout.
template <typename Emit>
void with_output(const std::string& flag, const std::string& configured, Emit emit) {
  const std::string path = !flag.empty() ? flag : configured;
  if (path.empty() || path == "-") {
    emit(std::cout);
    std::cout.flush();
    if (!std::cout) throw FormatError("failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open output file " + path);
  emit(out);
  out.flush();
  if (!out) throw FormatError("failed writing " + path);
}

int thread_count(const Options& o) {
  if (o.threads > 0) return o.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-well flux qubit: spectra, repeated flux measurements and temporal Bell scans"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration");
    sub->add_option("--out", o.out_path, "Output path ('-' for stdout)");
    sub->add_option("--threads", o.threads, "Worker threads for the scan (default: all cores)");
    sub->add_option("--dphi", o.dphi, "Override filter.delta_phi");
    sub->add_option("--mode", o.mode, "representative|integrated");
  };
  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalue table and tunneling period");
  auto* prepare = app.add_subcommand("prepare", "Trace of the preparatory measurement sequence");
  auto* scan_cmd = app.add_subcommand("scan", "Violation and uncertainty maps over (t_ab, t_bc)");
  auto* regions = app.add_subcommand("regions", "Region report for a scan CSV");
  auto* spatial = app.add_subcommand("spatial", "Analytic spatial inequality surface");
  for (auto* sub : {spectrum, prepare, scan_cmd, spatial}) add_common(sub);
  regions->add_option("input", o.input, "Scan CSV")->required();
  regions->add_option("--out", o.out_path, "Output path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*regions) {
      std::ifstream in(o.input);
      if (!in) throw FormatError("cannot open " + o.input);
      const ScanTable table = read_scan(in);
      with_output(o.out_path, "", [&](std::ostream& out) { out << regions_json(table).dump(2) << '\n'; });
      return 0;
    }
    const RunConfig cfg = resolve_config(o);
    if (*spatial) {
      with_output(o.out_path, cfg.output_spatial,
                  [&](std::ostream& out) { write_spatial(cfg.spatial_points, out); });
      return 0;
    }
    const Session session = open_session(cfg);
    if (*spectrum) {
      with_output(o.out_path, cfg.output_spectrum,
                  [&](std::ostream& out) { write_spectrum(session, out); });
    } else if (*prepare) {
      with_output(o.out_path, cfg.output_prepare,
                  [&](std::ostream& out) { write_preparation(session, out); });
    } else if (*scan_cmd) {
      const ScanRun run = run_scan(session, thread_count(o));
      with_output(o.out_path, cfg.output_scan,
                  [&](std::ostream& out) { write_scan(session, run.grid, out); });
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
