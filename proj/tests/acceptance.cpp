// Acceptance gate: one line per numbered check, nonzero exit when any fails.
// Every check compares the library (or the CLI binary, via LINEVAL_BIN)
// against independent reference implementations or hand-computed values.
//
// `acceptance --reference` re-measures the noise regression bound used by
// check 6: it runs the same solver on a 10x oversampled set of noisy scenes
// and prints the medians that are frozen below as kNoiseRef*.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lineval/association.hpp"
#include "lineval/data_io.hpp"
#include "lineval/detect_heatmap.hpp"
#include "lineval/detect_vectorized.hpp"
#include "lineval/errors.hpp"
#include "lineval/geometry.hpp"
#include "lineval/pose_estimation.hpp"
#include "lineval/repeatability.hpp"
#include "support/oracles.hpp"
#include "support/robust_pose.hpp"
#include "support/synthetic_scene.hpp"
#include "support/temp_dir.hpp"
#include "support/test_rng.hpp"

using namespace lineval;
using nlohmann::json;
using testsupport::Rng;
using testsupport::TempDir;

namespace {

// Medians of the 1-px-noise translation / rotation RPE measured by
// `acceptance --reference` (200 scenes, i.e. 10x the sample below). Frozen as
// the regression bound for check 6.
constexpr double kNoiseRefTrans = 1.60841988678556e-02;
constexpr double kNoiseRefRot = 2.76630717534675e-01;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct Gate {
  int failures = 0;

  void report(int index, const std::string& label, bool ok,
              const std::string& detail = "") {
    std::string line = "[" + std::to_string(index) + "/10] " + label + " ";
    while (line.size() < 58) line += '.';
    line += ok ? " PASS" : " FAIL";
    if (!detail.empty()) line += "  (" + detail + ")";
    std::cout << line << '\n';
    if (!ok) ++failures;
  }
};

std::string fmt_secs(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fs", s);
  return buf;
}

// ---------------------------------------------------------------- CLI runs

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(LINEVAL_BIN) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- checks

LineSegment2D random_segment(Rng& rng, double lo, double hi) {
  for (;;) {
    const Vec2 a(rng.uniform(lo, hi), rng.uniform(lo, hi));
    const Vec2 b(rng.uniform(lo, hi), rng.uniform(lo, hi));
    if ((a - b).norm() > 1e-3) return {a, b};
  }
}

bool check_distances(std::string* detail) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  for (int trial = 0; trial < 10000; ++trial) {
    const LineSegment2D a = random_segment(rng, -100.0, 500.0);
    const LineSegment2D b = random_segment(rng, -100.0, 500.0);
    for (const DistanceKind kind :
         {DistanceKind::Structural, DistanceKind::Orthogonal}) {
      const double d = segment_distance(a, b, kind);
      const double ref = testsupport::distance_oracle(a, b, kind);
      if (std::abs(d - ref) > 1e-9 * std::max(1.0, ref)) {
        *detail = "oracle mismatch at trial " + std::to_string(trial);
        return false;
      }
      if (d != segment_distance(b, a, kind)) {
        *detail = "symmetry broken at trial " + std::to_string(trial);
        return false;
      }
      const LineSegment2D a_swapped(a.p2, a.p1);
      if (d != segment_distance(a_swapped, b, kind)) {
        *detail = "endpoint swap broken at trial " + std::to_string(trial);
        return false;
      }
    }
  }
  const double secs = seconds_since(t0);
  *detail = fmt_secs(secs);
  return secs < 5.0;
}

bool check_classification(std::string* detail) {
  Rng rng(202);
  for (int trial = 0; trial < 500; ++trial) {
    const int n_pred = rng.uniform_int(0, 10);
    const int n_gt = rng.uniform_int(0, 10);
    const bool scored = rng.chance(0.5);
    const DistanceKind kind =
        trial % 2 ? DistanceKind::Orthogonal : DistanceKind::Structural;
    const double d_max = rng.uniform(1.0, 8.0);

    std::vector<LineSegment2D> gts, preds;
    for (int i = 0; i < n_gt; ++i) gts.push_back(random_segment(rng, 0, 24));
    std::vector<double> used_scores;
    for (int i = 0; i < n_pred; ++i) {
      LineSegment2D l = random_segment(rng, 0, 24);
      if (scored) {
        double s = rng.uniform(0.0, 1.0);
        if (!used_scores.empty() && rng.chance(0.3))
          s = used_scores[size_t(rng.uniform_int(0, int(used_scores.size()) - 1))];
        used_scores.push_back(s);
        l.score = s;
      }
      preds.push_back(l);
    }

    const ClassifiedDetections got =
        classify(preds, gts, MetricConfig(kind, d_max, {128, 128}));
    const testsupport::ReplayResult want =
        testsupport::classify_replay(preds, gts, kind, d_max);

    if (got.tp_count() != want.tp_count) {
      *detail = "tp count mismatch at trial " + std::to_string(trial);
      return false;
    }
    for (int i = 0; i < n_pred; ++i) {
      const bool tp = got.detections[size_t(i)].label == DetectionLabel::TP;
      const int claimed = got.detections[size_t(i)].matched_gt
                              ? *got.detections[size_t(i)].matched_gt
                              : -1;
      if (tp != want.tp[size_t(i)] || claimed != want.claimed[size_t(i)]) {
        *detail = "label mismatch at trial " + std::to_string(trial);
        return false;
      }
    }
  }
  *detail = "500 instances";
  return true;
}

bool check_average_precision(std::string* detail) {
  const MetricConfig cfg(DistanceKind::Structural, 5.0, {128, 128});
  const std::vector<LineSegment2D> gts = {{{0, 0}, {10, 0}}, {{0, 40}, {10, 40}}};
  const std::vector<LineSegment2D> preds = {{{0, 0}, {10, 0}, 0.9},
                                            {{60, 80}, {70, 80}, 0.8},
                                            {{0, 40}, {10, 40}, 0.7}};
  const double toy = average_precision({classify(preds, gts, cfg)});
  if (std::abs(toy - 5.0 / 6.0) > 1e-9) {
    *detail = "toy AP " + std::to_string(toy);
    return false;
  }

  std::vector<LineSegment2D> perfect = gts;
  perfect[0].score = 0.9;
  perfect[1].score = 0.8;
  const double ap = average_precision({classify(perfect, gts, cfg)});
  if (100.0 * ap != 100.0) {
    *detail = "perfect AP " + std::to_string(100.0 * ap);
    return false;
  }
  *detail = "toy 0.8333, perfect 100.0";
  return true;
}

bool check_heatmap_assignment(std::string* detail) {
  Rng rng(404);
  auto random_map = [&rng](int max_px) {
    Heatmap m(10, 10);
    const int n = rng.uniform_int(0, max_px);
    for (int i = 0; i < n; ++i) m.set(rng.uniform_int(0, 9), rng.uniform_int(0, 9));
    return m;
  };
  for (int trial = 0; trial < 500; ++trial) {
    const Heatmap pred = random_map(12), gt = random_map(12);
    const double d_max = rng.uniform(0.5, 6.0);
    const PixelMatchResult got = match_heatmaps(pred, gt, d_max);
    const testsupport::AssignmentOracleResult want =
        testsupport::assignment_oracle(pred, gt, d_max);
    if (got.tp != want.cardinality ||
        std::abs(got.total_assignment_cost - want.cost) > 1e-9) {
      *detail = "assignment mismatch at trial " + std::to_string(trial);
      return false;
    }
    if (got.tp + got.fp != pred.true_count() ||
        got.tp + got.fn != gt.true_count()) {
      *detail = "count identity broken at trial " + std::to_string(trial);
      return false;
    }
    if (match_heatmaps(pred, gt, d_max + 1.5).tp < got.tp) {
      *detail = "tp not monotone in d_max at trial " + std::to_string(trial);
      return false;
    }
  }
  *detail = "500 grids";
  return true;
}

bool check_repeatability(std::string* detail) {
  const MetricConfig cfg(DistanceKind::Structural, 5.0, {160, 120});

  Rng rng(505);
  {
    const auto seq = testsupport::make_rgbd_sequence(rng, 1, 20, 0.0, 0.0);
    const FramePairContext ctx{seq.frames[0].lines, seq.frames[0].lines,
                               seq.depths[0],       seq.depths[0],
                               PoseSE3::identity(), PoseSE3::identity(),
                               seq.cam};
    const RepeatabilityResult res = repeatability(ctx, cfg);
    if (res.rep != 1.0) {
      *detail = "identity rep " + std::to_string(res.rep);
      return false;
    }
    if (!res.localization_error || *res.localization_error > 0.5) {
      *detail = "identity localization error out of bounds";
      return false;
    }
  }

  for (int trial = 0; trial < 100; ++trial) {
    const auto seq = testsupport::make_rgbd_sequence(rng, 2, 12, 3.0, 0.08);
    const FramePairContext fwd{seq.frames[0].lines, seq.frames[1].lines,
                               seq.depths[0],       seq.depths[1],
                               seq.poses[0],        seq.poses[1],
                               seq.cam};
    const FramePairContext rev{seq.frames[1].lines, seq.frames[0].lines,
                               seq.depths[1],       seq.depths[0],
                               seq.poses[1],        seq.poses[0],
                               seq.cam};
    const RepeatabilityResult a = repeatability(fwd, cfg);
    const RepeatabilityResult b = repeatability(rev, cfg);
    const bool le_equal =
        a.localization_error.has_value() == b.localization_error.has_value() &&
        (!a.localization_error ||
         *a.localization_error == *b.localization_error);
    if (a.rep != b.rep || !le_equal ||
        a.matched_counts.first != b.matched_counts.second ||
        a.matched_counts.second != b.matched_counts.first ||
        a.denominator != b.denominator || a.dropped != b.dropped) {
      *detail = "swap asymmetry at trial " + std::to_string(trial);
      return false;
    }
  }
  *detail = "identity + 100 swapped pairs";
  return true;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct NoiseMedians {
  double trans, rot;
};

// Shared between check 6 and --reference so the bound measures the same
// solver on the same scene distribution.
NoiseMedians noisy_medians(std::uint64_t seed, int n_scenes) {
  Rng rng(seed);
  std::vector<double> trans, rot;
  for (int s = 0; s < n_scenes; ++s) {
    const auto scene =
        testsupport::make_pose_scene(rng, rng.uniform_int(20, 50), 15.0, 0.3);
    const auto cs = testsupport::noisy_correspondences(scene, rng, 1.0);
    const PoseEstimate est = estimate_relative_pose(cs, scene.cam, SolverConfig{});
    const RPEResult rpe = relative_pose_error(est.pose, scene.gt);
    trans.push_back(rpe.trans_error);
    rot.push_back(rpe.rot_error);
  }
  return {median_of(trans), median_of(rot)};
}

bool check_pose_solver(std::string* detail) {
  const auto t0 = std::chrono::steady_clock::now();

  Rng rng(606);
  for (int s = 0; s < 10; ++s) {
    const auto scene =
        testsupport::make_pose_scene(rng, rng.uniform_int(20, 50), 15.0, 0.3);
    const PoseEstimate est = estimate_relative_pose(
        testsupport::exact_correspondences(scene), scene.cam, SolverConfig{});
    const RPEResult rpe = relative_pose_error(est.pose, scene.gt);
    if (!est.converged || rpe.trans_error > 1e-6 || rpe.rot_error > 1e-6) {
      *detail = "noiseless scene " + std::to_string(s) + " off truth";
      return false;
    }
  }

  const NoiseMedians noisy = noisy_medians(616, 20);
  if (noisy.trans >= kNoiseRefTrans || noisy.rot >= kNoiseRefRot) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "noise medians %.3e m / %.3e deg over bound",
                  noisy.trans, noisy.rot);
    *detail = buf;
    return false;
  }

  // Gross outliers defeat any single fixed-scale robust fit (leverage points
  // relocate the Huber minimum), so the experiment runs the consensus
  // protocol: minimal-sample search plus annealed Huber-classified re-fits.
  Rng orng(626);
  for (int s = 0; s < 8; ++s) {
    const auto scene =
        testsupport::make_pose_scene(orng, orng.uniform_int(20, 50), 15.0, 0.3);
    const auto cs = testsupport::outlier_correspondences(scene, orng, 0.3);
    const PoseEstimate est = testsupport::consensus_pose(cs, scene.cam, orng);
    const RPEResult rpe = relative_pose_error(est.pose, scene.gt);
    if (!est.converged || rpe.trans_error > 1e-3 || rpe.rot_error > 0.01) {
      *detail = "outlier scene " + std::to_string(s) + " off truth";
      return false;
    }
  }

  const double secs = seconds_since(t0);
  *detail = fmt_secs(secs);
  return secs < 60.0;
}

bool check_jacobian(std::string* detail) {
  Rng rng(909);
  const double h = 1e-6;
  int checked = 0;
  while (checked < 1000) {
    const auto scene = testsupport::make_pose_scene(rng, 1, 20.0, 0.5);
    const LineCorrespondence c = testsupport::exact_correspondences(scene)[0];
    const PoseSE3 pose =
        testsupport::random_motion(rng, 10.0, 0.2).compose(scene.gt);

    Eigen::Matrix<double, 2, 6> J, numeric;
    try {
      J = jacobian(pose, c, scene.cam);
      for (int k = 0; k < 6; ++k) {
        Eigen::Matrix<double, 6, 1> tw = Eigen::Matrix<double, 6, 1>::Zero();
        tw[k] = h;
        const Eigen::Vector2d hi =
            residual(PoseSE3::exp(tw).compose(pose), c, scene.cam);
        tw[k] = -h;
        const Eigen::Vector2d lo =
            residual(PoseSE3::exp(tw).compose(pose), c, scene.cam);
        numeric.col(k) = (hi - lo) / (2.0 * h);
      }
    } catch (const ComputeError&) {
      continue;  // behind-camera configuration; not a differentiable point
    }
    if ((J - numeric).norm() > 1e-5 * std::max(1.0, J.norm())) {
      *detail = "gradient mismatch at configuration " + std::to_string(checked);
      return false;
    }
    ++checked;
  }
  *detail = "1000 configurations";
  return true;
}

bool check_dash_rule(std::string* detail) {
  std::vector<std::optional<RPEResult>> results;
  for (int i = 0; i < 4; ++i) results.push_back(RPEResult{0.01 * (i + 1), 0.1});
  for (int i = 0; i < 6; ++i) results.push_back(std::nullopt);
  const AggregatedPoseErrors agg = aggregate_pose_errors(results);
  if (!(agg.failure_fraction > 0.5) || agg.median_trans || agg.median_rot) {
    *detail = "medians not withheld at 60% failures";
    return false;
  }

  // exactly half must still report
  std::vector<std::optional<RPEResult>> half(results.begin(),
                                             results.begin() + 4);
  half.push_back(RPEResult{0.05, 0.1});
  for (int i = 0; i < 5; ++i) half.push_back(std::nullopt);
  const AggregatedPoseErrors at_half = aggregate_pose_errors(half);
  if (!at_half.median_trans || !at_half.median_rot) {
    *detail = "medians withheld at exactly 50%";
    return false;
  }
  *detail = "absent beyond half, present at half";
  return true;
}

struct CorpusExpectation {
  const char* name;
  std::int64_t n_tracks, n_frames, mean_rounded;
};

bool stats_match(const std::string& path, const CorpusExpectation& e,
                 std::string* detail) {
  const RunResult r = run_cli("stats " + path);
  if (r.code != 0) {
    *detail = std::string(e.name) + ": stats exited " + std::to_string(r.code);
    return false;
  }
  const json doc = json::parse(r.out, nullptr, false);
  if (doc.is_discarded()) {
    *detail = std::string(e.name) + ": unparsable report";
    return false;
  }
  const auto& res = doc["results"];
  if (res["n_tracks"].get<std::int64_t>() != e.n_tracks ||
      res["n_frames"].get<std::int64_t>() != e.n_frames ||
      res["mean_lines_per_frame_rounded"].get<std::int64_t>() !=
          e.mean_rounded) {
    *detail = std::string(e.name) + ": got (" +
              res["n_tracks"].dump() + ", " + res["n_frames"].dump() + ", " +
              res["mean_lines_per_frame_rounded"].dump() + ")";
    return false;
  }
  return true;
}

bool check_stats(std::string* detail) {
  static const CorpusExpectation kCorpora[] = {
      {"lr_kt2", 189, 881, 47},
      {"of_kt2", 346, 881, 78},
      {"fr3_cabinet", 46, 1147, 13},
      {"fr1_desk", 184, 613, 51},
  };

  if (const char* dir = std::getenv("LINEVAL_CORPUS_DIR")) {
    for (const CorpusExpectation& e : kCorpora) {
      const std::string path = std::string(dir) + "/" + e.name + ".json";
      if (!std::filesystem::exists(path)) {
        *detail = path + " missing";
        return false;
      }
      if (!stats_match(path, e, detail)) return false;
    }
    *detail = "external corpus, 4 sequences";
    return true;
  }

  // No external corpus: verify on a bundled fixture with known counts.
  TempDir dir("acc_stats");
  SequenceAnnotation ann;
  auto add_frame = [&ann](std::int64_t id, int track_lo, int track_hi) {
    Frame f;
    f.frame_id = id;
    for (int t = track_lo; t <= track_hi; ++t)
      f.lines.emplace_back(Vec2(t, 0), Vec2(t + 1, 5), std::nullopt, t);
    ann.frames.push_back(std::move(f));
  };
  add_frame(0, 0, 9);    // 10 lines
  add_frame(1, 5, 14);   // 10 lines
  add_frame(2, 0, 29);   // 30 lines
  write_annotations(ann, dir.str("fixture.json"));

  if (!stats_match(dir.str("fixture.json"), {"fixture", 30, 3, 17}, detail))
    return false;

  const RunResult r = run_cli("stats " + dir.str("fixture.json"));
  const json doc = json::parse(r.out);
  if (doc["results"]["mean_lines_per_frame"].get<double>() != 50.0 / 3.0) {
    *detail = "fixture mean not exact";
    return false;
  }
  *detail = "bundled fixture (30 tracks, 3 frames, mean 17)";
  return true;
}

bool check_determinism(std::string* detail) {
  TempDir dir("acc_det");
  Rng rng(990);
  const auto seq = testsupport::make_rgbd_sequence(rng, 3, 14, 2.0, 0.05);
  const auto paths = testsupport::write_sequence(seq, dir.str("seq"));

  DetectionSet scored;
  scored.scored = true;
  for (const Frame& f : seq.frames) {
    Frame copy;
    copy.frame_id = f.frame_id;
    double s = 0.95;
    for (const LineSegment2D& l : f.lines) {
      copy.lines.emplace_back(l.p1, l.p2, s);
      s -= 0.9 / double(f.lines.size());
    }
    scored.frames.push_back(std::move(copy));
  }
  write_detections(scored, dir.str("scored.txt"));

  struct Invocation {
    const char* tag;
    std::string args;
  };
  const std::vector<Invocation> runs = {
      {"eval-detection", "eval-detection --input-resolution 160x120 " +
                             paths.annotations + " " + dir.str("scored.txt")},
      {"eval-repeatability", "eval-repeatability " + paths.detections + " " +
                                 paths.depth_dir + " " + paths.trajectory +
                                 " " + paths.intrinsics},
      {"eval-pose", "eval-pose " + paths.annotations + " " + paths.matches +
                        " " + paths.depth_dir + " " + paths.trajectory + " " +
                        paths.intrinsics},
  };

  for (const Invocation& inv : runs) {
    const std::string a = dir.str("a.json"), b = dir.str("b.json"),
                      c = dir.str("c.json");
    if (run_cli(inv.args + " -j 1 -o " + a).code != 0 ||
        run_cli(inv.args + " -j 1 -o " + b).code != 0 ||
        run_cli(inv.args + " -j 4 -o " + c).code != 0) {
      *detail = std::string(inv.tag) + " exited nonzero";
      return false;
    }
    const std::string ta = slurp(a);
    if (ta.empty() || ta != slurp(b) || ta != slurp(c)) {
      *detail = std::string(inv.tag) + " outputs differ";
      return false;
    }
  }
  *detail = "3 commands, rerun and -j1 vs -j4";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1 && std::string(argv[1]) == "--reference") {
    const NoiseMedians ref = noisy_medians(707, 200);
    std::printf("kNoiseRefTrans = %.14e\nkNoiseRefRot = %.14e\n", ref.trans,
                ref.rot);
    return 0;
  }

  Gate gate;
  std::string detail;

  detail.clear();
  gate.report(1, "segment distance oracles (10000 pairs)",
              check_distances(&detail), detail);
  detail.clear();
  gate.report(2, "greedy classification vs replay", check_classification(&detail),
              detail);
  detail.clear();
  gate.report(3, "average precision hand values",
              check_average_precision(&detail), detail);
  detail.clear();
  gate.report(4, "heatmap assignment vs exhaustive oracle",
              check_heatmap_assignment(&detail), detail);
  detail.clear();
  gate.report(5, "repeatability identity and swap symmetry",
              check_repeatability(&detail), detail);
  detail.clear();
  gate.report(6, "pose solver exactness, noise bound, outliers",
              check_pose_solver(&detail), detail);
  detail.clear();
  gate.report(7, "analytic Jacobian vs central differences",
              check_jacobian(&detail), detail);
  detail.clear();
  gate.report(8, "median dash rule past half failures",
              check_dash_rule(&detail), detail);
  detail.clear();
  gate.report(9, "corpus statistics", check_stats(&detail), detail);
  detail.clear();
  gate.report(10, "byte-identical reports across reruns and jobs",
              check_determinism(&detail), detail);

  if (gate.failures) {
    std::cout << gate.failures << " of 10 checks failed\n";
    return 1;
  }
  std::cout << "all 10 checks passed\n";
  return 0;
}
