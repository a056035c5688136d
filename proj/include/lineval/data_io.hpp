#pragma once

#include <Eigen/Geometry>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lineval/association.hpp"
#include "lineval/geometry.hpp"

namespace lineval {

// One annotated or detected frame: segments in file order (indices are what
// match files refer to).
struct Frame {
  std::int64_t frame_id = 0;
  std::vector<LineSegment2D> lines;
};

// Ground-truth annotation sequence. frame_ids strictly increasing, track ids
// unique within a frame.
struct SequenceAnnotation {
  std::vector<Frame> frames;

  const Frame* find(std::int64_t frame_id) const;
};

struct SequenceStats {
  std::int64_t n_tracks = 0;
  std::int64_t n_frames = 0;
  double mean_lines_per_frame = 0.0;
};

// Detector output grouped by frame (first-appearance order). Either every
// segment carries a score or none does.
struct DetectionSet {
  std::vector<Frame> frames;
  bool scored = false;

  const Frame* find(std::int64_t frame_id) const;
};

struct PairMatches {
  std::int64_t frame_i = 0;
  std::int64_t frame_j = 0;
  MatchSet matches;
};

struct MatchFile {
  std::vector<PairMatches> pairs;

  const PairMatches* find(std::int64_t frame_i, std::int64_t frame_j) const;
};

// Camera trajectory: world-from-camera poses with strictly increasing
// timestamps. Frames map to records by position unless an explicit
// frame_id -> timestamp table is attached.
class TrajectoryFile {
 public:
  struct Record {
    double timestamp;
    Vec3 translation;
    Eigen::Quaterniond rotation;  // unit, (x, y, z, w) storage
  };

  TrajectoryFile() = default;
  explicit TrajectoryFile(std::vector<Record> records);

  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  void set_frame_map(std::vector<std::pair<std::int64_t, double>> frame_to_time);
  bool has_frame_map() const { return !frame_map_.empty(); }

  // World-from-camera pose of a frame. Without a frame map the id is the
  // record index; with one it resolves through the timestamp table.
  PoseSE3 pose_for_frame(std::int64_t frame_id) const;

 private:
  std::vector<Record> records_;
  std::vector<std::pair<std::int64_t, double>> frame_map_;  // sorted by id
};

// Relative ground truth pose_i^-1 * pose_j: maps camera-j coordinates into
// camera i.
PoseSE3 relative_gt(const TrajectoryFile& traj, std::int64_t frame_i,
                    std::int64_t frame_j);

struct TimingRecord {
  std::int64_t frame_id = 0;
  double seconds = 0.0;
};

// --- loaders -----------------------------------------------------------
// All loaders throw InputError with the offending path plus a row / field
// location; they never coerce malformed data.

SequenceAnnotation load_annotations(const std::string& path);
SequenceStats sequence_stats(const SequenceAnnotation& a);

DetectionSet load_detections(const std::string& path);

MatchFile load_matches(const std::string& path);

// 16-bit single-channel raster, PNG or binary PGM (dispatch on magic bytes).
// Dimensions must match the camera.
DepthImage load_depth(const std::string& path, const CameraModel& cam);

TrajectoryFile load_trajectory(const std::string& path);
// Optional two-column table: frame_id timestamp.
std::vector<std::pair<std::int64_t, double>> load_frame_map(const std::string& path);

std::vector<TimingRecord> load_timings(const std::string& path);
double fps(const std::vector<TimingRecord>& timings);

// Intrinsics document: {fx, fy, cx, cy, width, height, depth_scale?}.
CameraModel load_camera(const std::string& path);

// --- writers (fixtures and round-trip checks) --------------------------

void write_annotations(const SequenceAnnotation& a, const std::string& path);
void write_detections(const DetectionSet& d, const std::string& path);
void write_matches(const MatchFile& m, const std::string& path);
void write_depth_png(const DepthImage& img, const std::string& path);
void write_depth_pgm(const DepthImage& img, const std::string& path);
void write_trajectory(const TrajectoryFile& t, const std::string& path);
void write_timings(const std::vector<TimingRecord>& t, const std::string& path);
void write_camera(const CameraModel& cam, const std::string& path);

}  // namespace lineval
