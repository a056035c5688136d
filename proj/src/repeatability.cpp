#include "lineval/repeatability.hpp"

#include <limits>

#include "lineval/errors.hpp"

namespace lineval {

std::optional<double> nearest_distance(const LineSegment2D& l,
                                       const std::vector<LineSegment2D>& set,
                                       DistanceKind kind) {
  if (set.empty()) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& candidate : set) {
    best = std::min(best, segment_distance(l, candidate, kind));
  }
  return best;
}

int min_distance_indicator(const LineSegment2D& l,
                           const std::vector<LineSegment2D>& set,
                           const MetricConfig& cfg) {
  const auto d = nearest_distance(l, set, cfg.distance_kind);
  return (d && *d <= cfg.d_max) ? 1 : 0;
}

namespace {

struct Direction {
  long matched = 0;
  long dropped = 0;
  double distance_sum = 0.0;
};

// Reprojects `source` lines into the other frame and accumulates nearest
// distances against that frame's raw detections.
Direction scan(const std::vector<LineSegment2D>& source,
               const std::vector<LineSegment2D>& targets,
               const DepthImage& depth_src, const PoseSE3& pose_src,
               const PoseSE3& pose_dst, const CameraModel& cam,
               const MetricConfig& cfg) {
  Direction out;
  for (const auto& line : source) {
    const auto reproj = reproject_segment(line, depth_src, pose_src, pose_dst, cam);
    if (!reproj) {
      ++out.dropped;
      continue;
    }
    const auto d = nearest_distance(*reproj, targets, cfg.distance_kind);
    if (d && *d <= cfg.d_max) {
      ++out.matched;
      out.distance_sum += *d;
    }
  }
  return out;
}

}  // namespace

RepeatabilityResult repeatability(const FramePairContext& ctx,
                                  const MetricConfig& cfg) {
  const long denom = long(ctx.lines_1.size()) + long(ctx.lines_2.size());
  if (denom == 0) {
    throw ComputeError("repeatability undefined: both frames have no lines");
  }
  const Direction fwd = scan(ctx.lines_1, ctx.lines_2, ctx.depth_1, ctx.pose_1,
                             ctx.pose_2, ctx.camera, cfg);
  const Direction bwd = scan(ctx.lines_2, ctx.lines_1, ctx.depth_2, ctx.pose_2,
                             ctx.pose_1, ctx.camera, cfg);

  RepeatabilityResult out;
  out.denominator = denom;
  out.matched_counts = {fwd.matched, bwd.matched};
  out.dropped = fwd.dropped + bwd.dropped;
  out.rep = double(fwd.matched + bwd.matched) / double(denom);
  out.distance_sum = fwd.distance_sum + bwd.distance_sum;
  out.distance_count = fwd.matched + bwd.matched;
  if (out.distance_count > 0) {
    out.localization_error = out.distance_sum / double(out.distance_count);
  }
  return out;
}

}  // namespace lineval
