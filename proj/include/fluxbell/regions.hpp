#pragma once

// Connected regions of the scan masks and the analytic reference surface of
// the two-polarimeter (spatial) inequality.

#include <string>
#include <vector>

#include "fluxbell/protocol.hpp"

namespace fluxbell {

// sin^2(theta/2) - cos^2(phi/2) - cos^2((theta + phi)/2).
double spatial_delta_p(double theta, double phi_angle);

struct SpatialBellPoint {
  double theta = 0.0;
  double phi_angle = 0.0;
  double delta_p = 0.0;
};

// points x points samples of [0, 2 pi]^2, endpoints included, theta outer.
std::vector<SpatialBellPoint> spatial_surface(int points);

enum class Orientation { axis_aligned, diagonal, blob };
const char* to_string(Orientation o) noexcept;

struct Region {
  int label = 0;  // 1-based, in raster order of the first cell
  int area = 0;   // cells
  int row_min = 0, row_max = 0, col_min = 0, col_max = 0;
  double centroid_row = 0.0, centroid_col = 0.0;
  // d(col)/d(row) along the principal axis of the member cells; +-inf when
  // the axis is parallel to the column direction.
  double slope = 0.0;
  Orientation orientation = Orientation::blob;
};

// 4-connected components, labeled in raster order.
std::vector<Region> extract_regions(const Mask& mask);

// Principal-axis classification. Regions with fewer than three cells, or
// whose principal variances differ by less than a factor 2, are blobs;
// otherwise |slope| or |1/slope| below 0.2 is axis-aligned and
// |slope -+ 1| below 0.2 is diagonal.
Orientation classify_orientation(const std::vector<std::pair<int, int>>& cells, double* slope);

enum class Verdict { disjoint, overlap, no_violations, no_distinguishability };
const char* to_string(Verdict v) noexcept;

struct RegionReport {
  std::vector<Region> violation_regions;
  std::vector<Region> distinguishable_regions;
  int violation_cells = 0;
  int distinguishable_cells = 0;
  int intersection_cells = 0;
  Verdict verdict = Verdict::no_violations;
};

// Throws ConfigError when the mask shapes differ.
RegionReport intersection_report(const Mask& violation, const Mask& distinguishable);

}  // namespace fluxbell
