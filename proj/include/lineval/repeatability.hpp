#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lineval/detect_vectorized.hpp"
#include "lineval/geometry.hpp"

namespace lineval {

// Everything needed to evaluate one frame pair: detections, depth, and
// world-from-camera poses for both frames, plus the shared camera model.
struct FramePairContext {
  std::vector<LineSegment2D> lines_1;
  std::vector<LineSegment2D> lines_2;
  DepthImage depth_1;
  DepthImage depth_2;
  PoseSE3 pose_1;
  PoseSE3 pose_2;
  CameraModel camera;
};

struct RepeatabilityResult {
  double rep = 0.0;
  std::optional<double> localization_error;  // absent when no pair fell within d_max
  std::pair<long, long> matched_counts{0, 0};  // reproj-matched 1->2, 2->1
  long dropped = 0;  // lines lost to invalid depth / behind-camera / clipping

  // Pooled Dist-set payload for trajectory-level aggregation.
  double distance_sum = 0.0;
  long distance_count = 0;
  long denominator = 0;  // |L1| + |L2|
};

// 1 iff the minimum distance from l to any member of set is within d_max;
// 0 for an empty set.
int min_distance_indicator(const LineSegment2D& l,
                           const std::vector<LineSegment2D>& set,
                           const MetricConfig& cfg);

// Nearest distance from l to the set, or absent for an empty set.
std::optional<double> nearest_distance(const LineSegment2D& l,
                                       const std::vector<LineSegment2D>& set,
                                       DistanceKind kind);

// Depth-based cross-frame repeatability. Reprojects each frame's lines into
// the other frame, counts those landing within d_max of a raw detection
// there, and averages the within-threshold nearest distances. Lines lost to
// invalid depth stay in the denominator. Throws ComputeError when both line
// sets are empty.
RepeatabilityResult repeatability(const FramePairContext& ctx,
                                  const MetricConfig& cfg);

}  // namespace lineval
