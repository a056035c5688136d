// lineval: evaluation harness for line-segment detectors and associators on
// sequential RGB-D data. Subcommands cover vectorized and heatmap detection
// metrics, cross-frame repeatability, association quality, line-based
// relative pose error, corpus statistics, and detector throughput.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "lineval/association.hpp"
#include "lineval/data_io.hpp"
#include "lineval/detect_heatmap.hpp"
#include "lineval/detect_vectorized.hpp"
#include "lineval/errors.hpp"
#include "lineval/geometry.hpp"
#include "lineval/parallel.hpp"
#include "lineval/pose_estimation.hpp"
#include "lineval/repeatability.hpp"
#include "lineval/report.hpp"

using namespace lineval;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitCompute = 3;

std::pair<int, int> parse_resolution(const std::string& text) {
  const auto x = text.find('x');
  int w = 0, h = 0;
  try {
    if (x == std::string::npos) throw std::exception();
    std::size_t wend = 0, hend = 0;
    w = std::stoi(text.substr(0, x), &wend);
    h = std::stoi(text.substr(x + 1), &hend);
    if (wend != x || hend != text.size() - x - 1) throw std::exception();
  } catch (const std::exception&) {
    throw InputError("bad resolution '" + text + "' (expected WxH)");
  }
  if (w <= 0 || h <= 0)
    throw InputError("bad resolution '" + text + "' (dimensions must be positive)");
  return {w, h};
}

DistanceKind parse_distance(const std::string& name) {
  if (name == "structural") return DistanceKind::Structural;
  if (name == "orthogonal") return DistanceKind::Orthogonal;
  throw InputError("unknown distance '" + name +
                   "' (expected structural or orthogonal)");
}

std::string resolution_text(std::pair<int, int> r) {
  return std::to_string(r.first) + "x" + std::to_string(r.second);
}

// Depth maps live in a directory as <frame_id>.png or <frame_id>.pgm.
std::string depth_path_for(const std::string& dir, std::int64_t frame_id) {
  namespace fs = std::filesystem;
  const std::string stem = dir + "/" + std::to_string(frame_id);
  if (fs::exists(stem + ".png")) return stem + ".png";
  if (fs::exists(stem + ".pgm")) return stem + ".pgm";
  throw InputError("no depth image for frame " + std::to_string(frame_id) +
                   " under " + dir + " (expected " + stem + ".png or .pgm)");
}

// Lines for pose evaluation may come from an annotation document or a plain
// detection file; sniff on the first non-space byte.
std::vector<Frame> load_lines_any(const std::string& path) {
  {
    std::ifstream probe(path);
    if (!probe) throw InputError(path + ": cannot open file");
    char c = 0;
    while (probe.get(c) && std::isspace(static_cast<unsigned char>(c))) {
    }
    if (c == '{') return load_annotations(path).frames;
  }
  return load_detections(path).frames;
}

struct OutputOpts {
  std::string output = "-";
  std::string format = "json";
};

void add_output_opts(CLI::App* sub, OutputOpts& out) {
  sub->add_option("-o,--output", out.output, "Report path; '-' writes stdout")
      ->capture_default_str();
  sub->add_option("--format", out.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
}

void emit(const Report& report, const OutputOpts& out) {
  const ReportFormat fmt = parse_report_format(out.format);
  if (out.output == "-")
    std::cout << render_report(report, fmt);
  else
    write_report(report, out.output, fmt);
}

Report base_report(const std::string& command) {
  Report r;
  r.metadata()["tool"] = "lineval";
  r.metadata()["version"] = kVersion;
  r.metadata()["command"] = command;
  return r;
}

// Every detection frame must exist in the annotations; annotation frames
// without detections simply cost recall.
void check_frames_known(const SequenceAnnotation& ann, const DetectionSet& det,
                        const std::string& det_path) {
  for (const Frame& f : det.frames)
    if (!ann.find(f.frame_id))
      throw InputError(det_path + ": detections reference frame " +
                       std::to_string(f.frame_id) +
                       " absent from the annotations");
}

ordered_json pr_curve_json(const std::vector<PRPoint>& curve) {
  ordered_json arr = ordered_json::array();
  for (const PRPoint& p : curve) {
    ordered_json jp;
    jp["threshold"] = p.threshold;
    jp["precision"] = p.precision;
    jp["recall"] = p.recall;
    arr.push_back(std::move(jp));
  }
  return arr;
}

// ---------------------------------------------------------------- detection

struct DetectionOpts {
  std::string annotations;
  std::string detections;
  std::string distance = "structural";
  double d_max = 5.0;
  std::string resolution = "128x128";
  std::string input_resolution = "640x480";
  int jobs = 1;
  OutputOpts out;
};

Report run_eval_detection(const DetectionOpts& o) {
  const auto eval_res = parse_resolution(o.resolution);
  const auto input_res = parse_resolution(o.input_resolution);
  const MetricConfig cfg(parse_distance(o.distance), o.d_max, eval_res);

  const SequenceAnnotation ann = load_annotations(o.annotations);
  const DetectionSet det = load_detections(o.detections);
  check_frames_known(ann, det, o.detections);

  struct Job {
    const Frame* gt;
    const Frame* pred;  // may be null
  };
  std::vector<Job> jobs;
  jobs.reserve(ann.frames.size());
  for (const Frame& f : ann.frames) jobs.push_back({&f, det.find(f.frame_id)});

  const std::vector<ClassifiedDetections> per_frame = parallel_map(
      jobs, o.jobs, [&](const Job& job) {
        static const std::vector<LineSegment2D> kEmpty;
        const auto gt = rescale_lines(job.gt->lines, input_res, eval_res);
        const auto pred = rescale_lines(job.pred ? job.pred->lines : kEmpty,
                                        input_res, eval_res);
        return classify(pred, gt, cfg);
      });

  long tp = 0, fp = 0, n_gt = 0;
  for (const ClassifiedDetections& c : per_frame) {
    tp += c.tp_count();
    fp += c.fp_count();
    n_gt += c.gt_count;
  }

  Report r = base_report("eval-detection");
  r.metadata()["annotations"] = o.annotations;
  r.metadata()["detections"] = o.detections;
  r.metadata()["distance"] = o.distance;
  r.metadata()["d_max"] = o.d_max;
  r.metadata()["eval_resolution"] = resolution_text(eval_res);
  r.metadata()["input_resolution"] = resolution_text(input_res);
  r.metadata()["scored"] = det.scored;

  r.results()["frames"] = per_frame.size();
  r.results()["ground_truths"] = n_gt;
  r.results()["predictions"] = tp + fp;
  if (det.scored) {
    const double ap = average_precision(per_frame);
    const char* name =
        cfg.distance_kind == DistanceKind::Structural ? "sAP" : "oAP";
    r.results()[name] = 100.0 * ap;
    r.results()["pr_curve"] = pr_curve_json(pr_curve(per_frame));
  } else {
    const PRF prf = precision_recall_f(static_cast<int>(tp),
                                       static_cast<int>(fp),
                                       static_cast<int>(n_gt));
    r.results()["tp"] = tp;
    r.results()["fp"] = fp;
    r.results()["precision"] = 100.0 * prf.precision;
    r.results()["recall"] = 100.0 * prf.recall;
    r.results()["f_score"] = 100.0 * prf.f_score;
  }
  return r;
}

// ------------------------------------------------------------------ heatmap

struct HeatmapOpts {
  std::string annotations;
  std::string detections;
  std::optional<double> d_max;  // default 1% of the eval diagonal
  std::vector<double> thresholds{0.0, 0.1, 0.2, 0.3, 0.4,
                                 0.5, 0.6, 0.7, 0.8, 0.9};
  bool thresholds_given = false;
  std::string resolution = "128x128";
  std::string input_resolution = "640x480";
  int jobs = 1;
  OutputOpts out;
};

Report run_eval_heatmap(const HeatmapOpts& o) {
  const auto eval_res = parse_resolution(o.resolution);
  const auto input_res = parse_resolution(o.input_resolution);
  const double d_max = o.d_max ? *o.d_max : default_heatmap_dmax(eval_res);
  if (!(d_max >= 0)) throw InputError("d_max must be non-negative");

  const SequenceAnnotation ann = load_annotations(o.annotations);
  const DetectionSet det = load_detections(o.detections);
  check_frames_known(ann, det, o.detections);
  if (!det.scored && o.thresholds_given)
    throw InputError("--thresholds requires scored detections");

  struct Job {
    std::vector<LineSegment2D> gt;
    std::vector<LineSegment2D> pred;
  };
  std::vector<Job> jobs;
  jobs.reserve(ann.frames.size());
  for (const Frame& f : ann.frames) {
    const Frame* pred = det.find(f.frame_id);
    jobs.push_back({rescale_lines(f.lines, input_res, eval_res),
                    pred ? rescale_lines(pred->lines, input_res, eval_res)
                         : std::vector<LineSegment2D>{}});
  }

  Report r = base_report("eval-heatmap");
  r.metadata()["annotations"] = o.annotations;
  r.metadata()["detections"] = o.detections;
  r.metadata()["d_max"] = d_max;
  r.metadata()["eval_resolution"] = resolution_text(eval_res);
  r.metadata()["input_resolution"] = resolution_text(input_res);
  r.metadata()["scored"] = det.scored;
  r.results()["frames"] = jobs.size();

  if (det.scored) {
    r.metadata()["thresholds"] = o.thresholds;
    // One row of per-threshold tallies per frame, pooled exactly like
    // heatmap_pr_points does sequentially.
    const auto rows = parallel_map(jobs, o.jobs, [&](const Job& job) {
      for (const LineSegment2D& seg : job.pred)
        if (!seg.score) throw InputError("heatmap AP requires scored segments");
      const Heatmap gt_map = rasterize(job.gt, eval_res);
      std::vector<PixelMatchResult> row;
      row.reserve(o.thresholds.size());
      for (const double t : o.thresholds) {
        std::vector<LineSegment2D> kept;
        for (const LineSegment2D& seg : job.pred)
          if (*seg.score >= t) kept.push_back(seg);
        row.push_back(match_heatmaps(rasterize(kept, eval_res), gt_map, d_max));
      }
      return row;
    });

    std::vector<HeatmapPRPoint> points;
    points.reserve(o.thresholds.size());
    for (std::size_t k = 0; k < o.thresholds.size(); ++k) {
      std::vector<PixelMatchResult> column;
      column.reserve(rows.size());
      for (const auto& row : rows) column.push_back(row[k]);
      const HeatmapPRF prf = heatmap_prf(column);
      points.push_back({o.thresholds[k], prf.precision, prf.recall});
    }
    r.results()["apH"] = 100.0 * heatmap_ap_from_points(points);
    ordered_json arr = ordered_json::array();
    for (const HeatmapPRPoint& p : points) {
      ordered_json jp;
      jp["threshold"] = p.threshold;
      jp["precision"] = p.precision;
      jp["recall"] = p.recall;
      arr.push_back(std::move(jp));
    }
    r.results()["pr_curve"] = std::move(arr);
  } else {
    const auto matches = parallel_map(jobs, o.jobs, [&](const Job& job) {
      return match_heatmaps(rasterize(job.pred, eval_res),
                            rasterize(job.gt, eval_res), d_max);
    });
    long tp = 0, fp = 0, fn = 0;
    for (const PixelMatchResult& m : matches) {
      tp += m.tp;
      fp += m.fp;
      fn += m.fn;
    }
    const HeatmapPRF prf = heatmap_prf(matches);
    r.results()["tp"] = tp;
    r.results()["fp"] = fp;
    r.results()["fn"] = fn;
    r.results()["precision"] = 100.0 * prf.precision;
    r.results()["recall"] = 100.0 * prf.recall;
    r.results()["f_score"] = 100.0 * prf.f_score;
  }
  return r;
}

// ------------------------------------------------------------ repeatability

struct RepeatabilityOpts {
  std::string detections;
  std::string depth_dir;
  std::string trajectory;
  std::string intrinsics;
  std::string frame_map;
  int stride = 1;
  std::string distance = "structural";
  double d_max = 5.0;
  int jobs = 1;
  OutputOpts out;
};

Report run_eval_repeatability(const RepeatabilityOpts& o) {
  const CameraModel cam = load_camera(o.intrinsics);
  const MetricConfig cfg(parse_distance(o.distance), o.d_max,
                         {cam.width, cam.height});
  const std::vector<Frame> frames = load_lines_any(o.detections);
  TrajectoryFile traj = load_trajectory(o.trajectory);
  if (!o.frame_map.empty()) traj.set_frame_map(load_frame_map(o.frame_map));

  auto lines_of = [&](std::int64_t id) -> const std::vector<LineSegment2D>& {
    for (const Frame& f : frames)
      if (f.frame_id == id) return f.lines;
    throw InputError("frame " + std::to_string(id) + " vanished");  // unreachable
  };

  std::vector<std::int64_t> ids;
  ids.reserve(frames.size());
  for (const Frame& f : frames) ids.push_back(f.frame_id);
  std::sort(ids.begin(), ids.end());

  struct PairIds {
    std::int64_t a, b;
  };
  std::vector<PairIds> pairs;
  for (std::int64_t id : ids)
    if (std::binary_search(ids.begin(), ids.end(), id + o.stride))
      pairs.push_back({id, id + o.stride});
  if (pairs.empty())
    throw InputError("no frame pairs at stride " + std::to_string(o.stride));

  const auto results = parallel_map(pairs, o.jobs, [&](const PairIds& p) {
    FramePairContext ctx{lines_of(p.a),
                         lines_of(p.b),
                         load_depth(depth_path_for(o.depth_dir, p.a), cam),
                         load_depth(depth_path_for(o.depth_dir, p.b), cam),
                         traj.pose_for_frame(p.a),
                         traj.pose_for_frame(p.b),
                         cam};
    return repeatability(ctx, cfg);
  });

  double dist_sum = 0.0;
  long dist_count = 0, matched = 0, denominator = 0, dropped = 0;
  ordered_json per_pair = ordered_json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RepeatabilityResult& res = results[i];
    dist_sum += res.distance_sum;
    dist_count += res.distance_count;
    matched += res.matched_counts.first + res.matched_counts.second;
    denominator += res.denominator;
    dropped += res.dropped;
    ordered_json jp;
    jp["frame_i"] = pairs[i].a;
    jp["frame_j"] = pairs[i].b;
    jp["repeatability"] = res.rep;
    if (res.localization_error)
      jp["localization_error"] = *res.localization_error;
    else
      jp["localization_error"] = nullptr;
    jp["dropped"] = res.dropped;
    per_pair.push_back(std::move(jp));
  }

  Report r = base_report("eval-repeatability");
  r.metadata()["detections"] = o.detections;
  r.metadata()["depth_dir"] = o.depth_dir;
  r.metadata()["trajectory"] = o.trajectory;
  r.metadata()["intrinsics"] = o.intrinsics;
  if (!o.frame_map.empty()) r.metadata()["frame_map"] = o.frame_map;
  r.metadata()["stride"] = o.stride;
  r.metadata()["distance"] = o.distance;
  r.metadata()["d_max"] = o.d_max;

  r.results()["pairs"] = pairs.size();
  r.results()["repeatability"] =
      denominator > 0 ? static_cast<double>(matched) / denominator : 0.0;
  if (dist_count > 0)
    r.results()["localization_error"] = dist_sum / dist_count;
  else
    r.results()["localization_error"] = nullptr;
  r.results()["matched"] = matched;
  r.results()["denominator"] = denominator;
  r.results()["dropped"] = dropped;
  r.results()["per_pair"] = std::move(per_pair);
  return r;
}

// -------------------------------------------------------------- association

struct AssociationOpts {
  std::string annotations;
  std::string matches;
  int stride = 1;
  int jobs = 1;
  OutputOpts out;
};

Report run_eval_association(const AssociationOpts& o) {
  const SequenceAnnotation ann = load_annotations(o.annotations);
  const MatchFile mf = load_matches(o.matches);

  struct PairJob {
    std::int64_t a, b;
    const Frame* fa;
    const Frame* fb;
    const MatchSet* pred;
  };
  static const MatchSet kEmpty;
  std::vector<PairJob> pairs;
  for (const Frame& f : ann.frames) {
    const Frame* g = ann.find(f.frame_id + o.stride);
    if (!g) continue;
    const PairMatches* pm = mf.find(f.frame_id, g->frame_id);
    pairs.push_back({f.frame_id, g->frame_id, &f, g,
                     pm ? &pm->matches : &kEmpty});
  }
  if (pairs.empty())
    throw InputError("no frame pairs at stride " + std::to_string(o.stride));

  for (const PairMatches& pm : mf.pairs) {
    const bool known = std::any_of(
        pairs.begin(), pairs.end(), [&](const PairJob& p) {
          return p.a == pm.frame_i && p.b == pm.frame_j;
        });
    if (!known)
      throw InputError(o.matches + ": frame pair (" +
                       std::to_string(pm.frame_i) + ", " +
                       std::to_string(pm.frame_j) +
                       ") is not an annotated pair at stride " +
                       std::to_string(o.stride));
  }

  const auto tallies = parallel_map(pairs, o.jobs, [&](const PairJob& p) {
    try {
      return classify_matches(*p.pred, gt_matches(p.fa->lines, p.fb->lines),
                              static_cast<int>(p.fa->lines.size()),
                              static_cast<int>(p.fb->lines.size()));
    } catch (const InputError& e) {
      throw InputError("frame pair (" + std::to_string(p.a) + ", " +
                       std::to_string(p.b) + "): " + e.what());
    }
  });

  AssociationTally total;
  for (const AssociationTally& t : tallies) {
    total.tp += t.tp;
    total.fp += t.fp;
    total.fn += t.fn;
    total.tn += t.tn;
  }
  const AssociationPRF prf = association_prf(tallies);

  Report r = base_report("eval-association");
  r.metadata()["annotations"] = o.annotations;
  r.metadata()["matches"] = o.matches;
  r.metadata()["stride"] = o.stride;
  r.results()["pairs"] = pairs.size();
  r.results()["tp"] = total.tp;
  r.results()["fp"] = total.fp;
  r.results()["fn"] = total.fn;
  r.results()["tn"] = total.tn;
  r.results()["precision"] = prf.precision;
  r.results()["recall"] = prf.recall;
  r.results()["f_score"] = prf.f_score;
  return r;
}

// --------------------------------------------------------------------- pose

struct PoseOpts {
  std::string lines;
  std::string matches;
  std::string depth_dir;
  std::string trajectory;
  std::string intrinsics;
  std::string frame_map;
  int max_iterations = 100;
  double huber_delta = 1.0;
  double convergence_tol = 1e-10;
  double damping = 1e-3;
  int jobs = 1;
  OutputOpts out;
};

Report run_eval_pose(const PoseOpts& o) {
  const CameraModel cam = load_camera(o.intrinsics);
  const std::vector<Frame> frames = load_lines_any(o.lines);
  const MatchFile mf = load_matches(o.matches);
  TrajectoryFile traj = load_trajectory(o.trajectory);
  if (!o.frame_map.empty()) traj.set_frame_map(load_frame_map(o.frame_map));

  SolverConfig scfg;
  scfg.max_iterations = o.max_iterations;
  scfg.huber_delta = o.huber_delta;
  scfg.convergence_tol = o.convergence_tol;
  scfg.damping = o.damping;

  auto frame_lines = [&](std::int64_t id) -> const std::vector<LineSegment2D>& {
    for (const Frame& f : frames)
      if (f.frame_id == id) return f.lines;
    throw InputError(o.lines + ": no lines for frame " + std::to_string(id) +
                     " referenced by " + o.matches);
  };

  struct PairOutcome {
    std::optional<RPEResult> rpe;
    bool converged = false;
    int iterations = 0;
    double inlier_fraction = 0.0;
    long correspondences = 0;
    long dropped = 0;
  };

  const auto outcomes = parallel_map(
      mf.pairs, o.jobs, [&](const PairMatches& pm) {
        PairOutcome out;
        const auto& lines_i = frame_lines(pm.frame_i);
        const auto& lines_j = frame_lines(pm.frame_j);
        const DepthImage depth_i =
            load_depth(depth_path_for(o.depth_dir, pm.frame_i), cam);
        CorrespondenceSet cs;
        try {
          cs = build_correspondences(pm.matches, lines_i, lines_j, depth_i, cam);
        } catch (const InputError& e) {
          throw InputError("frame pair (" + std::to_string(pm.frame_i) + ", " +
                           std::to_string(pm.frame_j) + "): " + e.what());
        }
        out.correspondences = static_cast<long>(cs.correspondences.size());
        out.dropped = cs.dropped;
        // Ground truth maps camera-i coordinates into camera j, matching the
        // solved direction.
        const PoseSE3 gt = relative_gt(traj, pm.frame_j, pm.frame_i);
        try {
          const PoseEstimate est =
              estimate_relative_pose(cs.correspondences, cam, scfg);
          out.converged = est.converged;
          out.iterations = est.iterations;
          out.inlier_fraction = est.inlier_fraction;
          if (est.converged) out.rpe = relative_pose_error(est.pose, gt);
        } catch (const ComputeError&) {
          // Non-convergence / degenerate solve: counted as a failure.
        }
        return out;
      });

  std::vector<std::optional<RPEResult>> rpes;
  rpes.reserve(outcomes.size());
  ordered_json per_pair = ordered_json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const PairOutcome& oc = outcomes[i];
    rpes.push_back(oc.rpe);
    ordered_json jp;
    jp["frame_i"] = mf.pairs[i].frame_i;
    jp["frame_j"] = mf.pairs[i].frame_j;
    if (oc.rpe) {
      jp["trans_error_m"] = oc.rpe->trans_error;
      jp["rot_error_deg"] = oc.rpe->rot_error;
    } else {
      jp["trans_error_m"] = nullptr;
      jp["rot_error_deg"] = nullptr;
    }
    jp["converged"] = oc.converged;
    jp["iterations"] = oc.iterations;
    jp["inlier_fraction"] = oc.inlier_fraction;
    jp["correspondences"] = oc.correspondences;
    jp["dropped"] = oc.dropped;
    per_pair.push_back(std::move(jp));
  }

  const AggregatedPoseErrors agg = aggregate_pose_errors(rpes);

  Report r = base_report("eval-pose");
  r.metadata()["lines"] = o.lines;
  r.metadata()["matches"] = o.matches;
  r.metadata()["depth_dir"] = o.depth_dir;
  r.metadata()["trajectory"] = o.trajectory;
  r.metadata()["intrinsics"] = o.intrinsics;
  if (!o.frame_map.empty()) r.metadata()["frame_map"] = o.frame_map;
  r.metadata()["max_iterations"] = o.max_iterations;
  r.metadata()["huber_delta"] = o.huber_delta;
  r.metadata()["convergence_tol"] = o.convergence_tol;
  r.metadata()["damping"] = o.damping;
  r.metadata()["relative_pose_convention"] = "camera_j_from_camera_i";

  r.results()["pairs"] = outcomes.size();
  r.results()["failure_fraction"] = agg.failure_fraction;
  if (agg.median_trans)
    r.results()["median_trans_m"] = *agg.median_trans;
  else
    r.results()["median_trans_m"] = nullptr;
  if (agg.median_rot)
    r.results()["median_rot_deg"] = *agg.median_rot;
  else
    r.results()["median_rot_deg"] = nullptr;
  r.results()["per_pair"] = std::move(per_pair);
  return r;
}

// -------------------------------------------------------------- stats / fps

struct StatsOpts {
  std::string annotations;
  OutputOpts out;
};

Report run_stats(const StatsOpts& o) {
  const SequenceStats s = sequence_stats(load_annotations(o.annotations));
  Report r = base_report("stats");
  r.metadata()["annotations"] = o.annotations;
  r.results()["n_tracks"] = s.n_tracks;
  r.results()["n_frames"] = s.n_frames;
  r.results()["mean_lines_per_frame"] = s.mean_lines_per_frame;
  r.results()["mean_lines_per_frame_rounded"] =
      static_cast<std::int64_t>(std::llround(s.mean_lines_per_frame));
  return r;
}

struct FpsOpts {
  std::string timings;
  OutputOpts out;
};

Report run_fps(const FpsOpts& o) {
  const auto timings = load_timings(o.timings);
  double total = 0;
  for (const TimingRecord& t : timings) total += t.seconds;
  Report r = base_report("fps");
  r.metadata()["timings"] = o.timings;
  r.results()["frames"] = timings.size();
  r.results()["total_seconds"] = total;
  r.results()["fps"] = fps(timings);
  return r;
}

void add_jobs_opt(CLI::App* sub, int& jobs) {
  sub->add_option("-j,--jobs", jobs, "Worker threads (never affects output)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "lineval — evaluation of line-segment detectors and associators on "
      "sequential RGB-D data"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Read options from an INI/TOML file (command line wins)");

  DetectionOpts det;
  auto* det_cmd = app.add_subcommand(
      "eval-detection", "Vectorized detection metrics (AP / P-R-F)");
  det_cmd->add_option("annotations", det.annotations, "Annotation document")
      ->required();
  det_cmd->add_option("detections", det.detections, "Detection file")
      ->required();
  det_cmd->add_option("--distance", det.distance, "Segment distance")
      ->check(CLI::IsMember({"structural", "orthogonal"}))
      ->capture_default_str();
  det_cmd->add_option("--dmax", det.d_max, "Match threshold in pixels")
      ->capture_default_str();
  det_cmd->add_option("--resolution", det.resolution, "Evaluation resolution")
      ->capture_default_str();
  det_cmd
      ->add_option("--input-resolution", det.input_resolution,
                   "Resolution the input coordinates live in")
      ->capture_default_str();
  add_jobs_opt(det_cmd, det.jobs);
  add_output_opts(det_cmd, det.out);

  HeatmapOpts hm;
  auto* hm_cmd = app.add_subcommand(
      "eval-heatmap", "Pixel-level heatmap metrics (AP^H / F^H)");
  hm_cmd->add_option("annotations", hm.annotations, "Annotation document")
      ->required();
  hm_cmd->add_option("detections", hm.detections, "Detection file")
      ->required();
  double hm_dmax_value = 0.0;
  auto* hm_dmax_opt =
      hm_cmd->add_option("--dmax", hm_dmax_value,
                         "Pixel match threshold (default: 1% of diagonal)");
  auto* hm_thresh_opt =
      hm_cmd
          ->add_option("--thresholds", hm.thresholds,
                       "Score thresholds for the PR sweep")
          ->delimiter(',')
          ->capture_default_str();
  hm_cmd->add_option("--resolution", hm.resolution, "Evaluation resolution")
      ->capture_default_str();
  hm_cmd
      ->add_option("--input-resolution", hm.input_resolution,
                   "Resolution the input coordinates live in")
      ->capture_default_str();
  add_jobs_opt(hm_cmd, hm.jobs);
  add_output_opts(hm_cmd, hm.out);

  RepeatabilityOpts rep;
  auto* rep_cmd = app.add_subcommand(
      "eval-repeatability", "Cross-frame repeatability via depth reprojection");
  rep_cmd->add_option("detections", rep.detections,
                      "Detection file or annotation document")
      ->required();
  rep_cmd->add_option("depth_dir", rep.depth_dir,
                      "Directory of <frame_id>.png|.pgm depth maps")
      ->required();
  rep_cmd->add_option("trajectory", rep.trajectory,
                      "Trajectory file (timestamp tx ty tz qx qy qz qw)")
      ->required();
  rep_cmd->add_option("intrinsics", rep.intrinsics, "Intrinsics document")
      ->required();
  rep_cmd->add_option("--frame-map", rep.frame_map,
                      "frame_id -> timestamp table (default: row index)");
  rep_cmd->add_option("--stride", rep.stride, "Frame-id stride between pairs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rep_cmd->add_option("--distance", rep.distance, "Segment distance")
      ->check(CLI::IsMember({"structural", "orthogonal"}))
      ->capture_default_str();
  rep_cmd->add_option("--dmax", rep.d_max, "Match threshold in pixels")
      ->capture_default_str();
  add_jobs_opt(rep_cmd, rep.jobs);
  add_output_opts(rep_cmd, rep.out);

  AssociationOpts assoc;
  auto* assoc_cmd = app.add_subcommand(
      "eval-association", "Match classification against track annotations");
  assoc_cmd->add_option("annotations", assoc.annotations, "Annotation document")
      ->required();
  assoc_cmd->add_option("matches", assoc.matches,
                        "Match file (frame_i frame_j idx_i idx_j)")
      ->required();
  assoc_cmd
      ->add_option("--stride", assoc.stride, "Frame-id stride between pairs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_jobs_opt(assoc_cmd, assoc.jobs);
  add_output_opts(assoc_cmd, assoc.out);

  PoseOpts pose;
  auto* pose_cmd = app.add_subcommand(
      "eval-pose", "Relative pose from matched lines, with median RPE");
  pose_cmd->add_option("lines", pose.lines,
                       "Annotation document or detection file")
      ->required();
  pose_cmd->add_option("matches", pose.matches, "Match file")->required();
  pose_cmd->add_option("depth_dir", pose.depth_dir,
                       "Directory of <frame_id>.png|.pgm depth maps")
      ->required();
  pose_cmd->add_option("trajectory", pose.trajectory, "Trajectory file")
      ->required();
  pose_cmd->add_option("intrinsics", pose.intrinsics, "Intrinsics document")
      ->required();
  pose_cmd->add_option("--frame-map", pose.frame_map,
                       "frame_id -> timestamp table (default: row index)");
  pose_cmd
      ->add_option("--max-iterations", pose.max_iterations,
                   "Solver iteration cap")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  pose_cmd->add_option("--huber-delta", pose.huber_delta, "Robust kernel width")
      ->capture_default_str();
  pose_cmd->add_option("--tol", pose.convergence_tol, "Step-norm stop threshold")
      ->capture_default_str();
  pose_cmd->add_option("--damping", pose.damping, "Initial Levenberg damping")
      ->capture_default_str();
  add_jobs_opt(pose_cmd, pose.jobs);
  add_output_opts(pose_cmd, pose.out);

  StatsOpts stats;
  auto* stats_cmd =
      app.add_subcommand("stats", "Corpus statistics for an annotation file");
  stats_cmd->add_option("annotations", stats.annotations, "Annotation document")
      ->required();
  add_output_opts(stats_cmd, stats.out);

  FpsOpts fpso;
  auto* fps_cmd =
      app.add_subcommand("fps", "Throughput from a per-frame timing file");
  fps_cmd->add_option("timings", fpso.timings, "Timing file (frame_id seconds)")
      ->required();
  add_output_opts(fps_cmd, fpso.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    hm.thresholds_given = hm_thresh_opt->count() > 0;
    if (hm_dmax_opt->count() > 0) hm.d_max = hm_dmax_value;

    if (*det_cmd)
      emit(run_eval_detection(det), det.out);
    else if (*hm_cmd)
      emit(run_eval_heatmap(hm), hm.out);
    else if (*rep_cmd)
      emit(run_eval_repeatability(rep), rep.out);
    else if (*assoc_cmd)
      emit(run_eval_association(assoc), assoc.out);
    else if (*pose_cmd)
      emit(run_eval_pose(pose), pose.out);
    else if (*stats_cmd)
      emit(run_stats(stats), stats.out);
    else if (*fps_cmd)
      emit(run_fps(fpso), fpso.out);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ComputeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  }
  return kExitOk;
}
