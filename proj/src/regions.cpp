#include "fluxbell/regions.hpp"

#include <cmath>
#include <limits>
#include <queue>

#include "fluxbell/error.hpp"

namespace fluxbell {

double spatial_delta_p(double theta, double phi_angle) {
  const double a = std::sin(0.5 * theta);
  const double b = std::cos(0.5 * phi_angle);
  const double c = std::cos(0.5 * (theta + phi_angle));
  return a * a - b * b - c * c;
}

std::vector<SpatialBellPoint> spatial_surface(int points) {
  if (points < 2) throw ConfigError("spatial.points", "must be at least 2");
  std::vector<SpatialBellPoint> out;
  out.reserve(std::size_t(points) * points);
  const double step = 2.0 * M_PI / (points - 1);
  for (int i = 0; i < points; ++i) {
    for (int j = 0; j < points; ++j) {
      const double theta = i * step, phi = j * step;
      out.push_back({theta, phi, spatial_delta_p(theta, phi)});
    }
  }
  return out;
}

const char* to_string(Orientation o) noexcept {
  switch (o) {
    case Orientation::axis_aligned: return "axis-aligned";
    case Orientation::diagonal: return "diagonal";
    case Orientation::blob: return "blob";
  }
  return "?";
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::disjoint: return "disjoint";
    case Verdict::overlap: return "overlap";
    case Verdict::no_violations: return "no_violations";
    case Verdict::no_distinguishability: return "no_distinguishability";
  }
  return "?";
}

Orientation classify_orientation(const std::vector<std::pair<int, int>>& cells, double* slope) {
  constexpr double kTolerance = 0.2;
  constexpr double kMinAnisotropy = 2.0;
  if (slope) *slope = 0.0;
  if (cells.size() < 3) return Orientation::blob;

  double mr = 0.0, mc = 0.0;
  for (auto [r, c] : cells) {
    mr += r;
    mc += c;
  }
  mr /= cells.size();
  mc /= cells.size();
  double srr = 0.0, scc = 0.0, src = 0.0;
  for (auto [r, c] : cells) {
    srr += (r - mr) * (r - mr);
    scc += (c - mc) * (c - mc);
    src += (r - mr) * (c - mc);
  }
  // Eigen-decomposition of the 2x2 scatter matrix.
  const double half_trace = 0.5 * (srr + scc);
  const double disc = std::sqrt(0.25 * (srr - scc) * (srr - scc) + src * src);
  const double major = half_trace + disc, minor = half_trace - disc;
  // Major-axis direction (dr, dc).
  double dr, dc;
  if (std::abs(src) > 0.0) {
    dr = src;
    dc = major - srr;
  } else if (srr >= scc) {
    dr = 1.0;
    dc = 0.0;
  } else {
    dr = 0.0;
    dc = 1.0;
  }
  const double s = dr != 0.0 ? dc / dr : std::numeric_limits<double>::infinity();
  if (slope) *slope = s;

  if (minor > 0.0 && major < kMinAnisotropy * minor) return Orientation::blob;
  if (std::abs(s) < kTolerance || std::abs(1.0 / s) < kTolerance) return Orientation::axis_aligned;
  if (std::abs(s + 1.0) < kTolerance || std::abs(s - 1.0) < kTolerance) return Orientation::diagonal;
  return Orientation::blob;
}

std::vector<Region> extract_regions(const Mask& mask) {
  const int rows = mask.rows, cols = mask.cols;
  if (static_cast<std::size_t>(rows) * cols != mask.values.size()) {
    throw ConfigError("mask", "ragged mask");
  }
  Grid2D<int> label(rows, cols, 0);
  std::vector<Region> regions;
  std::queue<std::pair<int, int>> work;
  constexpr int dr[4] = {-1, 1, 0, 0};
  constexpr int dc[4] = {0, 0, -1, 1};

  for (int r0 = 0; r0 < rows; ++r0) {
    for (int c0 = 0; c0 < cols; ++c0) {
      if (!mask(r0, c0) || label(r0, c0) != 0) continue;
      Region reg;
      reg.label = static_cast<int>(regions.size()) + 1;
      reg.row_min = reg.row_max = r0;
      reg.col_min = reg.col_max = c0;
      std::vector<std::pair<int, int>> cells;
      label(r0, c0) = reg.label;
      work.push({r0, c0});
      while (!work.empty()) {
        auto [r, c] = work.front();
        work.pop();
        cells.push_back({r, c});
        reg.row_min = std::min(reg.row_min, r);
        reg.row_max = std::max(reg.row_max, r);
        reg.col_min = std::min(reg.col_min, c);
        reg.col_max = std::max(reg.col_max, c);
        for (int d = 0; d < 4; ++d) {
          const int nr = r + dr[d], nc = c + dc[d];
          if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
          if (!mask(nr, nc) || label(nr, nc) != 0) continue;
          label(nr, nc) = reg.label;
          work.push({nr, nc});
        }
      }
      reg.area = static_cast<int>(cells.size());
      for (auto [r, c] : cells) {
        reg.centroid_row += r;
        reg.centroid_col += c;
      }
      reg.centroid_row /= reg.area;
      reg.centroid_col /= reg.area;
      reg.orientation = classify_orientation(cells, &reg.slope);
      regions.push_back(reg);
    }
  }
  return regions;
}

RegionReport intersection_report(const Mask& violation, const Mask& distinguishable) {
  if (violation.rows != distinguishable.rows || violation.cols != distinguishable.cols) {
    throw ConfigError("mask", "violation and distinguishability masks differ in shape");
  }
  RegionReport report;
  report.violation_regions = extract_regions(violation);
  report.distinguishable_regions = extract_regions(distinguishable);
  for (std::size_t k = 0; k < violation.values.size(); ++k) {
    const bool v = violation.values[k] != 0, d = distinguishable.values[k] != 0;
    report.violation_cells += v;
    report.distinguishable_cells += d;
    report.intersection_cells += v && d;
  }
  if (report.violation_cells == 0) {
    report.verdict = Verdict::no_violations;
  } else if (report.distinguishable_cells == 0) {
    report.verdict = Verdict::no_distinguishability;
  } else {
    report.verdict = report.intersection_cells == 0 ? Verdict::disjoint : Verdict::overlap;
  }
  return report;
}

}  // namespace fluxbell
