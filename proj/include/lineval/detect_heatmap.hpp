#pragma once

#include <utility>
#include <vector>

#include "lineval/geometry.hpp"

namespace lineval {

// Boolean pixel-membership matrix produced by rasterizing line segments.
struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<bool> membership;  // row-major

  Heatmap() = default;
  Heatmap(int w, int h) : width(w), height(h), membership(size_t(w) * h, false) {}

  bool at(int x, int y) const { return membership[size_t(y) * width + x]; }
  void set(int x, int y) { membership[size_t(y) * width + x] = true; }
  long true_count() const;
};

struct PixelMatchResult {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  double total_assignment_cost = 0.0;
};

// 8-connected midpoint rasterization with endpoints rounded to the nearest
// integer; segments are clipped to the grid and unioned.
Heatmap rasterize(const std::vector<LineSegment2D>& segments,
                  std::pair<int, int> size);

// Maximum-cardinality matching of minimum total Euclidean distance between
// true pixels of pred and gt, restricted to pairs within d_max. Matched pred
// pixels are TP, the rest FP; unmatched gt pixels are FN.
PixelMatchResult match_heatmaps(const Heatmap& pred, const Heatmap& gt,
                                double d_max);

// Pixel-level precision/recall/F from tp/fp/fn totals across frames.
struct HeatmapPRF {
  double precision;
  double recall;
  double f_score;
};

HeatmapPRF heatmap_prf(const std::vector<PixelMatchResult>& results);

// Default pixel threshold: 1% of the image diagonal.
double default_heatmap_dmax(std::pair<int, int> size);

// Confidence-threshold sweep: for each threshold, keep segments with
// score >= threshold, rasterize, match against the ground-truth raster, and
// pool counts over frames into one PR point. The returned curve is one point
// per threshold, in the given order.
struct HeatmapPRPoint {
  double threshold;
  double precision;
  double recall;
};

std::vector<HeatmapPRPoint> heatmap_pr_points(
    const std::vector<std::vector<LineSegment2D>>& scored_segments_per_frame,
    const std::vector<std::vector<LineSegment2D>>& gt_per_frame,
    const std::vector<double>& thresholds, double d_max,
    std::pair<int, int> size);

// Monotone-interpolated area under the threshold-sweep PR curve, in [0, 1].
// Throws InputError if any segment lacks a score.
double heatmap_ap(
    const std::vector<std::vector<LineSegment2D>>& scored_segments_per_frame,
    const std::vector<std::vector<LineSegment2D>>& gt_per_frame,
    const std::vector<double>& thresholds, double d_max,
    std::pair<int, int> size);

double heatmap_ap_from_points(std::vector<HeatmapPRPoint> points);

}  // namespace lineval
