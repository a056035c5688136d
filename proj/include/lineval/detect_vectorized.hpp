#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lineval/geometry.hpp"

namespace lineval {

struct MetricConfig {
  DistanceKind distance_kind = DistanceKind::Structural;
  double d_max = 5.0;                        // pixels, at eval resolution
  std::pair<int, int> eval_resolution{128, 128};

  MetricConfig() = default;
  MetricConfig(DistanceKind kind, double d_max, std::pair<int, int> resolution);
};

enum class DetectionLabel { TP, FP };

struct ClassifiedDetection {
  DetectionLabel label = DetectionLabel::FP;
  std::optional<double> score;
  std::optional<int> matched_gt;  // index into the ground-truth list
};

// Per-frame classification outcome: one entry per prediction, in input order.
struct ClassifiedDetections {
  std::vector<ClassifiedDetection> detections;
  int gt_count = 0;

  int tp_count() const;
  int fp_count() const;
};

struct PRPoint {
  double threshold;
  double precision;
  double recall;
};

// Scales endpoint coordinates componentwise by to/from; scores and track ids
// are preserved.
std::vector<LineSegment2D> rescale_lines(const std::vector<LineSegment2D>& lines,
                                         std::pair<int, int> from,
                                         std::pair<int, int> to);

// Greedy TP/FP assignment. Predictions are processed in descending score
// order (ties by ascending nearest-ground-truth distance, then input index);
// without scores, in ascending nearest-ground-truth distance order, so the
// closer of two competing segments wins. Each prediction claims its nearest
// unclaimed ground truth within d_max.
ClassifiedDetections classify(const std::vector<LineSegment2D>& preds,
                              const std::vector<LineSegment2D>& gts,
                              const MetricConfig& cfg);

// Precision is 1 when there are no predictions, recall is 1 when there is no
// ground truth, F is 0 when both P and R vanish.
struct PRF {
  double precision;
  double recall;
  double f_score;
};

PRF precision_recall_f(int tp, int fp, int gt_count);
PRF precision_recall_f(const ClassifiedDetections& c);

// Dataset-level average precision: pools detections across frames, sorts by
// descending score, and integrates the monotone-interpolated PR curve with
// recall denominator equal to the pooled ground-truth count. Returns a value
// in [0, 1]. Throws InputError if any detection lacks a score.
double average_precision(const std::vector<ClassifiedDetections>& per_frame);

// The monotone-interpolated PR polyline behind average_precision, one point
// per distinct score with consecutive duplicate (recall, precision) pairs
// collapsed.
std::vector<PRPoint> pr_curve(const std::vector<ClassifiedDetections>& per_frame);

}  // namespace lineval
