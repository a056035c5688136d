#include "lineval/pose_estimation.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "lineval/errors.hpp"

namespace lineval {

namespace {

// Classic Huber loss on the residual-vector norm e: quadratic inside delta,
// linear outside. The IRLS weight rho'(e)/e keeps the Gauss-Newton system
// exact for the robust gradient.
double huber_cost(double e, double delta) {
  return e <= delta ? 0.5 * e * e : delta * (e - 0.5 * delta);
}

double huber_weight(double e, double delta) {
  return e <= delta ? 1.0 : delta / e;
}

struct CostEval {
  double cost = 0.0;
  long valid = 0;
  long inliers = 0;
};

CostEval evaluate_cost(const PoseSE3& pose,
                       const std::vector<LineCorrespondence>& correspondences,
                       const CameraModel& cam, double delta) {
  CostEval out;
  for (const auto& c : correspondences) {
    const Vec3 p = pose.apply(c.P);
    const Vec3 q = pose.apply(c.Q);
    if (!(p[2] > 0) || !(q[2] > 0)) continue;
    Eigen::Vector2d r;
    r[0] = c.l.coeffs[0] * (cam.fx * p[0] / p[2] + cam.cx) +
           c.l.coeffs[1] * (cam.fy * p[1] / p[2] + cam.cy) + c.l.coeffs[2];
    r[1] = c.l.coeffs[0] * (cam.fx * q[0] / q[2] + cam.cx) +
           c.l.coeffs[1] * (cam.fy * q[1] / q[2] + cam.cy) + c.l.coeffs[2];
    const double e = r.norm();
    out.cost += huber_cost(e, delta);
    ++out.valid;
    if (e < delta) ++out.inliers;
  }
  return out;
}

// d(l^T pi(X)) / dX for a camera-frame point X.
Vec3 incidence_point_gradient(const Vec3& l, const Vec3& X, const CameraModel& cam) {
  const double iz = 1.0 / X[2];
  return Vec3(l[0] * cam.fx * iz, l[1] * cam.fy * iz,
              -(l[0] * cam.fx * X[0] + l[1] * cam.fy * X[1]) * iz * iz);
}

Eigen::Matrix<double, 1, 6> residual_row(const Vec3& l, const Vec3& X,
                                         const CameraModel& cam) {
  const Vec3 g = incidence_point_gradient(l, X, cam);
  // dX/d omega = -[X]_x and dX/dv = I at zero perturbation, so the rotation
  // block is g^T (-[X]_x) = (X x g)^T.
  const Vec3 rot = X.cross(g);
  Eigen::Matrix<double, 1, 6> row;
  row << rot[0], rot[1], rot[2], g[0], g[1], g[2];
  return row;
}

}  // namespace

Eigen::Vector2d residual(const PoseSE3& pose, const LineCorrespondence& c,
                         const CameraModel& cam) {
  const Vec3 p = pose.apply(c.P);
  const Vec3 q = pose.apply(c.Q);
  if (!(p[2] > 0) || !(q[2] > 0)) {
    throw ComputeError("correspondence endpoint behind camera");
  }
  Eigen::Vector2d r;
  r[0] = c.l.coeffs[0] * (cam.fx * p[0] / p[2] + cam.cx) +
         c.l.coeffs[1] * (cam.fy * p[1] / p[2] + cam.cy) + c.l.coeffs[2];
  r[1] = c.l.coeffs[0] * (cam.fx * q[0] / q[2] + cam.cx) +
         c.l.coeffs[1] * (cam.fy * q[1] / q[2] + cam.cy) + c.l.coeffs[2];
  return r;
}

Eigen::Matrix<double, 2, 6> jacobian(const PoseSE3& pose,
                                     const LineCorrespondence& c,
                                     const CameraModel& cam) {
  const Vec3 p = pose.apply(c.P);
  const Vec3 q = pose.apply(c.Q);
  if (!(p[2] > 0) || !(q[2] > 0)) {
    throw ComputeError("correspondence endpoint behind camera");
  }
  Eigen::Matrix<double, 2, 6> J;
  J.row(0) = residual_row(c.l.coeffs, p, cam);
  J.row(1) = residual_row(c.l.coeffs, q, cam);
  return J;
}

PoseEstimate estimate_relative_pose(const std::vector<LineCorrespondence>& correspondences,
                                    const CameraModel& cam,
                                    const SolverConfig& cfg) {
  if (correspondences.size() < 3) {
    throw ComputeError("pose estimation needs at least 3 line correspondences");
  }
  if (cfg.max_iterations < 1 || !(cfg.huber_delta > 0) ||
      !(cfg.convergence_tol > 0) || !(cfg.damping > 0)) {
    throw InputError("invalid solver configuration");
  }

  PoseSE3 pose = cfg.initial_pose;
  CostEval current = evaluate_cost(pose, correspondences, cam, cfg.huber_delta);
  if (current.valid == 0) {
    throw ComputeError("all correspondences behind camera at the initial pose");
  }
  if (!std::isfinite(current.cost)) {
    throw ComputeError("non-finite cost at the initial pose");
  }

  double lambda = cfg.damping;
  bool converged = false;
  int iterations = 0;

  using Mat6 = Eigen::Matrix<double, 6, 6>;
  using Vec6 = Eigen::Matrix<double, 6, 1>;

  for (; iterations < cfg.max_iterations; ) {
    ++iterations;

    Mat6 H = Mat6::Zero();
    Vec6 g = Vec6::Zero();
    for (const auto& c : correspondences) {
      const Vec3 p = pose.apply(c.P);
      const Vec3 q = pose.apply(c.Q);
      if (!(p[2] > 0) || !(q[2] > 0)) continue;  // skipped this iteration
      const Eigen::Vector2d r = residual(pose, c, cam);
      const Eigen::Matrix<double, 2, 6> J = jacobian(pose, c, cam);
      const double w = huber_weight(r.norm(), cfg.huber_delta);
      H.noalias() += w * J.transpose() * J;
      g.noalias() += w * J.transpose() * r;
    }

    const Vec6 step = (H + lambda * Mat6::Identity()).ldlt().solve(-g);
    if (!step.allFinite()) {
      throw ComputeError("pose optimization diverged: non-finite step");
    }
    if (step.norm() < cfg.convergence_tol) {
      converged = true;
      break;
    }

    const PoseSE3 candidate = PoseSE3::exp(step).compose(pose);
    const CostEval trial = evaluate_cost(candidate, correspondences, cam,
                                         cfg.huber_delta);
    if (!std::isfinite(trial.cost)) {
      throw ComputeError("pose optimization diverged: non-finite cost");
    }
    if (trial.valid >= 3 && trial.cost < current.cost) {
      pose = candidate;
      current = trial;
      lambda *= 0.1;
    } else {
      lambda *= 10.0;
      if (lambda > 1e32) {
        break;  // damping saturated without an acceptable step
      }
    }
  }

  PoseEstimate out;
  out.pose = pose;
  out.converged = converged;
  out.final_cost = current.cost;
  out.iterations = iterations;
  out.inlier_fraction = double(current.inliers) / double(correspondences.size());
  return out;
}

RPEResult relative_pose_error(const PoseSE3& estimate, const PoseSE3& ground_truth) {
  const PoseSE3 delta = ground_truth.inverse().compose(estimate);
  const double cos_angle =
      std::clamp((delta.rotation().trace() - 1.0) * 0.5, -1.0, 1.0);
  RPEResult out;
  out.trans_error = delta.translation().norm();
  out.rot_error = std::acos(cos_angle) * 180.0 / M_PI;
  return out;
}

AggregatedPoseErrors aggregate_pose_errors(
    const std::vector<std::optional<RPEResult>>& results) {
  std::vector<double> trans, rot;
  long failures = 0;
  for (const auto& r : results) {
    if (r) {
      trans.push_back(r->trans_error);
      rot.push_back(r->rot_error);
    } else {
      ++failures;
    }
  }
  AggregatedPoseErrors out;
  out.failure_fraction =
      results.empty() ? 0.0 : double(failures) / double(results.size());

  const auto median = [](std::vector<double>& v) -> double {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  if (!trans.empty() && out.failure_fraction <= 0.5) {
    out.median_trans = median(trans);
    out.median_rot = median(rot);
  }
  return out;
}

CorrespondenceSet build_correspondences(const MatchSet& matches,
                                        const std::vector<LineSegment2D>& lines_i,
                                        const std::vector<LineSegment2D>& lines_j,
                                        const DepthImage& depth_i,
                                        const CameraModel& cam) {
  CorrespondenceSet out;
  for (const auto& [idx_i, idx_j] : matches.pairs()) {
    if (idx_i >= int(lines_i.size()) || idx_j >= int(lines_j.size())) {
      throw InputError("match index out of range of the line lists");
    }
    const auto& li = lines_i[idx_i];
    const auto P = backproject(cam, li.p1, depth_i);
    const auto Q = backproject(cam, li.p2, depth_i);
    if (!P || !Q) {
      ++out.dropped;
      continue;
    }
    const auto& lj = lines_j[idx_j];
    out.correspondences.push_back(
        LineCorrespondence{*P, *Q, line_coefficients(lj.p1, lj.p2)});
  }
  return out;
}

}  // namespace lineval
