#pragma once

#include <optional>
#include <vector>

#include "lineval/association.hpp"
#include "lineval/geometry.hpp"

namespace lineval {

// One matched line: 3D endpoints in the source-camera (map) frame and the
// homogeneous observation of the same line in the destination frame.
struct LineCorrespondence {
  Vec3 P;
  Vec3 Q;
  HomogeneousLine2D l;
};

struct SolverConfig {
  int max_iterations = 100;
  double huber_delta = 1.0;         // on the residual-vector norm
  PoseSE3 initial_pose;             // identity: consecutive frames move little
  double convergence_tol = 1e-10;   // step-norm threshold
  double damping = 1e-3;            // initial Levenberg parameter
};

struct PoseEstimate {
  PoseSE3 pose;
  bool converged = false;
  double final_cost = 0.0;
  int iterations = 0;
  double inlier_fraction = 0.0;
};

struct RPEResult {
  double trans_error = 0.0;  // meters
  double rot_error = 0.0;    // degrees
};

// Incidence residual (l^T pi(T P), l^T pi(T Q)) with pi in homogeneous pixel
// coordinates. Throws ComputeError when either transformed endpoint has
// non-positive depth.
Eigen::Vector2d residual(const PoseSE3& pose, const LineCorrespondence& c,
                         const CameraModel& cam);

// Analytic derivative of the residual w.r.t. a left perturbation
// exp([omega, v]) * T, columns ordered (rotation, translation).
Eigen::Matrix<double, 2, 6> jacobian(const PoseSE3& pose,
                                     const LineCorrespondence& c,
                                     const CameraModel& cam);

// Levenberg-Marquardt over SE(3) with a Huber kernel on the residual norm.
// Damping is multiplicative (x10 on reject, /10 on accept). Correspondences
// whose endpoints fall behind the camera at the current pose are skipped for
// that iteration. Throws ComputeError on fewer than 3 correspondences, when
// every correspondence is invalid, or when the cost turns non-finite.
PoseEstimate estimate_relative_pose(const std::vector<LineCorrespondence>& correspondences,
                                    const CameraModel& cam,
                                    const SolverConfig& cfg);

// E = T_gt^-1 * T_est; translation norm in meters, rotation angle in degrees.
RPEResult relative_pose_error(const PoseSE3& estimate, const PoseSE3& ground_truth);

struct AggregatedPoseErrors {
  std::optional<double> median_trans;  // absent when failures exceed half
  std::optional<double> median_rot;
  double failure_fraction = 0.0;
};

// Medians over successful estimates; when more than half of the entries
// failed the medians are reported as absent.
AggregatedPoseErrors aggregate_pose_errors(const std::vector<std::optional<RPEResult>>& results);

struct CorrespondenceSet {
  std::vector<LineCorrespondence> correspondences;
  long dropped = 0;  // matches lost to invalid endpoint depth
};

// Builds solver correspondences for a matched frame pair: frame-i endpoints
// back-projected through depth_i, frame-j endpoints turned into a homogeneous
// line observation.
CorrespondenceSet build_correspondences(const MatchSet& matches,
                                        const std::vector<LineSegment2D>& lines_i,
                                        const std::vector<LineSegment2D>& lines_j,
                                        const DepthImage& depth_i,
                                        const CameraModel& cam);

}  // namespace lineval
