#include "lineval/detect_vectorized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lineval/errors.hpp"

namespace lineval {

MetricConfig::MetricConfig(DistanceKind kind, double d_max,
                           std::pair<int, int> resolution)
    : distance_kind(kind), d_max(d_max), eval_resolution(resolution) {
  if (!(d_max > 0)) throw InputError("d_max must be positive");
  if (resolution.first <= 0 || resolution.second <= 0) {
    throw InputError("evaluation resolution must be positive");
  }
}

int ClassifiedDetections::tp_count() const {
  return int(std::count_if(detections.begin(), detections.end(),
                           [](const ClassifiedDetection& d) {
                             return d.label == DetectionLabel::TP;
                           }));
}

int ClassifiedDetections::fp_count() const {
  return int(detections.size()) - tp_count();
}

std::vector<LineSegment2D> rescale_lines(const std::vector<LineSegment2D>& lines,
                                         std::pair<int, int> from,
                                         std::pair<int, int> to) {
  if (from.first <= 0 || from.second <= 0 || to.first <= 0 || to.second <= 0) {
    throw InputError("image dimensions must be positive");
  }
  const double sx = double(to.first) / from.first;
  const double sy = double(to.second) / from.second;
  std::vector<LineSegment2D> out;
  out.reserve(lines.size());
  for (const auto& l : lines) {
    out.emplace_back(Vec2(l.p1[0] * sx, l.p1[1] * sy),
                     Vec2(l.p2[0] * sx, l.p2[1] * sy), l.score, l.track_id);
  }
  return out;
}

ClassifiedDetections classify(const std::vector<LineSegment2D>& preds,
                              const std::vector<LineSegment2D>& gts,
                              const MetricConfig& cfg) {
  const size_t n = preds.size();
  ClassifiedDetections out;
  out.gt_count = int(gts.size());
  out.detections.resize(n);
  for (size_t i = 0; i < n; ++i) out.detections[i].score = preds[i].score;
  if (n == 0) return out;

  // Distance of each prediction to its nearest ground truth, used only for
  // ordering.
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < n; ++i) {
    for (const auto& gt : gts) {
      nearest[i] = std::min(nearest[i],
                            segment_distance(preds[i], gt, cfg.distance_kind));
    }
  }

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (preds[a].score && preds[b].score && *preds[a].score != *preds[b].score) {
      return *preds[a].score > *preds[b].score;
    }
    if (nearest[a] != nearest[b]) return nearest[a] < nearest[b];
    return a < b;
  });

  std::vector<bool> claimed(gts.size(), false);
  for (size_t idx : order) {
    double best = std::numeric_limits<double>::infinity();
    int best_gt = -1;
    for (size_t j = 0; j < gts.size(); ++j) {
      if (claimed[j]) continue;
      const double d = segment_distance(preds[idx], gts[j], cfg.distance_kind);
      if (d < best) {
        best = d;
        best_gt = int(j);
      }
    }
    if (best_gt >= 0 && best <= cfg.d_max) {
      claimed[best_gt] = true;
      out.detections[idx].label = DetectionLabel::TP;
      out.detections[idx].matched_gt = best_gt;
    } else {
      out.detections[idx].label = DetectionLabel::FP;
    }
  }
  return out;
}

PRF precision_recall_f(int tp, int fp, int gt_count) {
  const double precision = (tp + fp == 0) ? 1.0 : double(tp) / (tp + fp);
  const double recall = (gt_count == 0) ? 1.0 : double(tp) / gt_count;
  const double f = (precision + recall == 0.0)
                       ? 0.0
                       : 2.0 * precision * recall / (precision + recall);
  return PRF{precision, recall, f};
}

PRF precision_recall_f(const ClassifiedDetections& c) {
  return precision_recall_f(c.tp_count(), c.fp_count(), c.gt_count);
}

namespace {

struct PooledDetections {
  // (score, is_tp), sorted by descending score; ties keep frame-then-index
  // order so results do not depend on the sort implementation.
  std::vector<std::pair<double, bool>> scored;
  long total_gt = 0;
};

PooledDetections pool(const std::vector<ClassifiedDetections>& per_frame) {
  PooledDetections pooled;
  for (const auto& frame : per_frame) {
    pooled.total_gt += frame.gt_count;
    for (const auto& det : frame.detections) {
      if (!det.score) {
        throw InputError("average precision requires scored detections");
      }
      pooled.scored.emplace_back(*det.score, det.label == DetectionLabel::TP);
    }
  }
  std::stable_sort(pooled.scored.begin(), pooled.scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  return pooled;
}

// Raw cumulative PR point per distinct score threshold.
std::vector<PRPoint> raw_curve(const PooledDetections& pooled) {
  std::vector<PRPoint> points;
  long tp = 0, fp = 0;
  const size_t n = pooled.scored.size();
  for (size_t i = 0; i < n; ++i) {
    if (pooled.scored[i].second) ++tp; else ++fp;
    // Emit only at the last detection of each distinct score so equal-scored
    // detections form a single operating point.
    if (i + 1 < n && pooled.scored[i + 1].first == pooled.scored[i].first) continue;
    const double precision = double(tp) / double(tp + fp);
    const double recall = pooled.total_gt == 0 ? 0.0 : double(tp) / double(pooled.total_gt);
    points.push_back(PRPoint{pooled.scored[i].first, precision, recall});
  }
  return points;
}

// Replace each precision with the maximum precision at recall >= its recall.
void interpolate(std::vector<PRPoint>& points) {
  double max_p = 0.0;
  for (auto it = points.rbegin(); it != points.rend(); ++it) {
    max_p = std::max(max_p, it->precision);
    it->precision = max_p;
  }
  // Points tied on recall all satisfy each other's "recall >= r", so the tie
  // run shares one value; the suffix pass leaves its maximum at the front.
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].recall == points[i - 1].recall)
      points[i].precision = points[i - 1].precision;
}

}  // namespace

double average_precision(const std::vector<ClassifiedDetections>& per_frame) {
  const PooledDetections pooled = pool(per_frame);
  auto points = raw_curve(pooled);
  interpolate(points);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const auto& pt : points) {
    ap += (pt.recall - prev_recall) * pt.precision;
    prev_recall = pt.recall;
  }
  return ap;
}

std::vector<PRPoint> pr_curve(const std::vector<ClassifiedDetections>& per_frame) {
  const PooledDetections pooled = pool(per_frame);
  auto points = raw_curve(pooled);
  interpolate(points);
  std::vector<PRPoint> out;
  for (const auto& pt : points) {
    if (!out.empty() && out.back().recall == pt.recall &&
        out.back().precision == pt.precision) {
      continue;
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace lineval
