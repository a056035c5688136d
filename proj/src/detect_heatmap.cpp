#include "lineval/detect_heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "lineval/errors.hpp"

namespace lineval {

long Heatmap::true_count() const {
  return std::count(membership.begin(), membership.end(), true);
}

namespace {

// 8-connected Bresenham walk between integer endpoints; pixels outside the
// grid are skipped.
void draw_line(Heatmap& map, long x0, long y0, long x1, long y1) {
  const long dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const long dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  while (true) {
    if (x0 >= 0 && x0 < map.width && y0 >= 0 && y0 < map.height) {
      map.set(int(x0), int(y0));
    }
    if (x0 == x1 && y0 == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) { err += dy; x0 += sx; }
    if (e2 <= dx) { err += dx; y0 += sy; }
  }
}

}  // namespace

Heatmap rasterize(const std::vector<LineSegment2D>& segments,
                  std::pair<int, int> size) {
  if (size.first <= 0 || size.second <= 0) {
    throw InputError("heatmap size must be positive");
  }
  Heatmap map(size.first, size.second);
  for (const auto& seg : segments) {
    // Clip first so endpoints far outside the grid cannot blow up the walk.
    auto clipped = clip_segment(seg, size.first, size.second);
    if (!clipped) {
      // A segment shrunk to a point by clipping still covers one pixel.
      const long x = std::lround(seg.p1[0]), y = std::lround(seg.p1[1]);
      const long u = std::lround(seg.p2[0]), v = std::lround(seg.p2[1]);
      if (x == u && y == v && x >= 0 && x < map.width && y >= 0 && y < map.height) {
        map.set(int(x), int(y));
      }
      continue;
    }
    draw_line(map, std::lround(clipped->p1[0]), std::lround(clipped->p1[1]),
              std::lround(clipped->p2[0]), std::lround(clipped->p2[1]));
  }
  return map;
}

namespace {

struct Edge {
  int to;       // gt pixel index
  double cost;  // Euclidean pixel distance
};

// Min-cost maximum-cardinality bipartite matching by successive shortest
// paths with Johnson potentials. Costs are non-negative, so Dijkstra applies
// from the start; each augmentation extends a minimum-cost matching of the
// next cardinality.
struct Assignment {
  long cardinality = 0;
  double total_cost = 0.0;
  std::vector<int> pred_match;  // gt index or -1
};

Assignment solve_assignment(int n_pred, int n_gt,
                            const std::vector<std::vector<Edge>>& adj) {
  Assignment result;
  result.pred_match.assign(n_pred, -1);
  std::vector<int> gt_match(n_gt, -1);
  std::vector<double> pot_pred(n_pred, 0.0), pot_gt(n_gt, 0.0);

  const double inf = std::numeric_limits<double>::infinity();
  while (true) {
    // Multi-source Dijkstra from all unmatched pred nodes over reduced costs.
    std::vector<double> dist_pred(n_pred, inf), dist_gt(n_gt, inf);
    std::vector<int> parent_gt(n_gt, -1);  // pred that reached this gt
    using Item = std::pair<double, int>;   // (distance, pred index)
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (int i = 0; i < n_pred; ++i) {
      if (result.pred_match[i] == -1) {
        dist_pred[i] = 0.0;
        heap.emplace(0.0, i);
      }
    }
    double best_dist = inf;
    int best_gt = -1;
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist_pred[u]) continue;
      if (d >= best_dist) continue;
      for (const Edge& e : adj[u]) {
        // Potentials make reduced costs non-negative in exact arithmetic;
        // rounding can leave them at -1e-16, and a negative cycle of such
        // dust would let the relaxation loop run forever. Clamp it away.
        const double nd =
            d + std::max(0.0, e.cost + pot_pred[u] - pot_gt[e.to]);
        if (nd < dist_gt[e.to]) {
          dist_gt[e.to] = nd;
          parent_gt[e.to] = u;
          const int owner = gt_match[e.to];
          if (owner == -1) {
            if (nd < best_dist || (nd == best_dist && e.to < best_gt)) {
              best_dist = nd;
              best_gt = e.to;
            }
          } else if (nd < dist_pred[owner]) {
            // Traverse the matched edge backwards at zero reduced cost.
            dist_pred[owner] = nd;
            heap.emplace(nd, owner);
          }
        }
      }
    }
    if (best_gt == -1) break;

    // Clamp distances at the augmenting-path cost so reduced costs stay
    // non-negative on every arc, including arcs into unreached nodes.
    for (int i = 0; i < n_pred; ++i) pot_pred[i] += std::min(dist_pred[i], best_dist);
    for (int j = 0; j < n_gt; ++j) pot_gt[j] += std::min(dist_gt[j], best_dist);

    // Augment along the alternating path ending at best_gt.
    int j = best_gt;
    while (j != -1) {
      const int i = parent_gt[j];
      const int next_j = result.pred_match[i];
      result.pred_match[i] = j;
      gt_match[j] = i;
      j = next_j;
    }
    ++result.cardinality;
  }

  for (int i = 0; i < n_pred; ++i) {
    if (result.pred_match[i] != -1) {
      const int j = result.pred_match[i];
      double cost = inf;
      for (const Edge& e : adj[i]) {
        if (e.to == j) cost = std::min(cost, e.cost);
      }
      result.total_cost += cost;
    }
  }
  return result;
}

}  // namespace

PixelMatchResult match_heatmaps(const Heatmap& pred, const Heatmap& gt,
                                double d_max) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw InputError("heatmap dimensions differ");
  }
  if (!(d_max >= 0)) throw InputError("d_max must be non-negative");

  std::vector<std::pair<int, int>> pred_px, gt_px;
  for (int y = 0; y < pred.height; ++y) {
    for (int x = 0; x < pred.width; ++x) {
      if (pred.at(x, y)) pred_px.emplace_back(x, y);
      if (gt.at(x, y)) gt_px.emplace_back(x, y);
    }
  }

  // Bucket gt pixels on a coarse grid so candidate generation touches only
  // nearby cells instead of all pairs.
  const int cell = std::max(1, int(std::ceil(d_max)));
  const int gw = pred.width / cell + 1, gh = pred.height / cell + 1;
  std::vector<std::vector<int>> buckets(size_t(gw) * gh);
  for (int j = 0; j < int(gt_px.size()); ++j) {
    buckets[size_t(gt_px[j].second / cell) * gw + gt_px[j].first / cell].push_back(j);
  }

  std::vector<std::vector<Edge>> adj(pred_px.size());
  const double d2max = d_max * d_max;
  for (int i = 0; i < int(pred_px.size()); ++i) {
    const auto [px, py] = pred_px[i];
    const int cx = px / cell, cy = py / cell;
    for (int by = std::max(0, cy - 1); by <= std::min(gh - 1, cy + 1); ++by) {
      for (int bx = std::max(0, cx - 1); bx <= std::min(gw - 1, cx + 1); ++bx) {
        for (int j : buckets[size_t(by) * gw + bx]) {
          const double dx = px - gt_px[j].first, dy = py - gt_px[j].second;
          const double d2 = dx * dx + dy * dy;
          if (d2 <= d2max) adj[i].push_back(Edge{j, std::sqrt(d2)});
        }
      }
    }
  }

  const Assignment matching = solve_assignment(int(pred_px.size()),
                                               int(gt_px.size()), adj);
  PixelMatchResult out;
  out.tp = matching.cardinality;
  out.fp = long(pred_px.size()) - matching.cardinality;
  out.fn = long(gt_px.size()) - matching.cardinality;
  out.total_assignment_cost = matching.total_cost;
  return out;
}

HeatmapPRF heatmap_prf(const std::vector<PixelMatchResult>& results) {
  long tp = 0, fp = 0, fn = 0;
  for (const auto& r : results) {
    tp += r.tp;
    fp += r.fp;
    fn += r.fn;
  }
  const double precision = (tp + fp == 0) ? 1.0 : double(tp) / (tp + fp);
  const double recall = (tp + fn == 0) ? 1.0 : double(tp) / (tp + fn);
  const double f = (precision + recall == 0.0)
                       ? 0.0
                       : 2.0 * precision * recall / (precision + recall);
  return HeatmapPRF{precision, recall, f};
}

double default_heatmap_dmax(std::pair<int, int> size) {
  return 0.01 * std::hypot(double(size.first), double(size.second));
}

std::vector<HeatmapPRPoint> heatmap_pr_points(
    const std::vector<std::vector<LineSegment2D>>& scored_segments_per_frame,
    const std::vector<std::vector<LineSegment2D>>& gt_per_frame,
    const std::vector<double>& thresholds, double d_max,
    std::pair<int, int> size) {
  if (scored_segments_per_frame.size() != gt_per_frame.size()) {
    throw InputError("prediction and ground-truth frame counts differ");
  }
  for (const auto& frame : scored_segments_per_frame) {
    for (const auto& seg : frame) {
      if (!seg.score) throw InputError("heatmap AP requires scored segments");
    }
  }

  std::vector<Heatmap> gt_maps;
  gt_maps.reserve(gt_per_frame.size());
  for (const auto& frame : gt_per_frame) gt_maps.push_back(rasterize(frame, size));

  std::vector<HeatmapPRPoint> points;
  points.reserve(thresholds.size());
  for (const double t : thresholds) {
    std::vector<PixelMatchResult> results;
    results.reserve(gt_maps.size());
    for (size_t f = 0; f < gt_maps.size(); ++f) {
      std::vector<LineSegment2D> kept;
      for (const auto& seg : scored_segments_per_frame[f]) {
        if (*seg.score >= t) kept.push_back(seg);
      }
      results.push_back(match_heatmaps(rasterize(kept, size), gt_maps[f], d_max));
    }
    const HeatmapPRF prf = heatmap_prf(results);
    points.push_back(HeatmapPRPoint{t, prf.precision, prf.recall});
  }
  return points;
}

double heatmap_ap_from_points(std::vector<HeatmapPRPoint> points) {
  std::stable_sort(points.begin(), points.end(),
                   [](const HeatmapPRPoint& a, const HeatmapPRPoint& b) {
                     return a.recall < b.recall;
                   });
  double max_p = 0.0;
  for (auto it = points.rbegin(); it != points.rend(); ++it) {
    max_p = std::max(max_p, it->precision);
    it->precision = max_p;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const auto& pt : points) {
    ap += (pt.recall - prev_recall) * pt.precision;
    prev_recall = pt.recall;
  }
  return ap;
}

double heatmap_ap(
    const std::vector<std::vector<LineSegment2D>>& scored_segments_per_frame,
    const std::vector<std::vector<LineSegment2D>>& gt_per_frame,
    const std::vector<double>& thresholds, double d_max,
    std::pair<int, int> size) {
  return heatmap_ap_from_points(heatmap_pr_points(
      scored_segments_per_frame, gt_per_frame, thresholds, d_max, size));
}

}  // namespace lineval
