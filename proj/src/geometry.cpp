#include "lineval/geometry.hpp"

#include <cmath>
#include <sstream>

#include "lineval/errors.hpp"

namespace lineval {

namespace {

constexpr double kDegenerateLength = 1e-12;

bool finite(const Vec2& v) { return std::isfinite(v[0]) && std::isfinite(v[1]); }

Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0, -w[2], w[1], w[2], 0, -w[0], -w[1], w[0], 0;
  return s;
}

}  // namespace

LineSegment2D::LineSegment2D(const Vec2& a, const Vec2& b,
                             std::optional<double> score,
                             std::optional<int> track_id)
    : p1(a), p2(b), score(score), track_id(track_id) {
  if (!finite(a) || !finite(b)) {
    throw InputError("line segment endpoints must be finite");
  }
  if ((a - b).norm() <= kDegenerateLength) {
    throw InputError("zero-length line segment");
  }
  if (score && (!(*score >= 0.0) || !(*score <= 1.0))) {
    std::ostringstream msg;
    msg << "segment score " << *score << " outside [0, 1]";
    throw InputError(msg.str());
  }
}

CameraModel::CameraModel(double fx, double fy, double cx, double cy,
                         double depth_scale, int width, int height)
    : fx(fx), fy(fy), cx(cx), cy(cy), depth_scale(depth_scale),
      width(width), height(height) {
  if (!(fx > 0) || !(fy > 0)) throw InputError("focal lengths must be positive");
  if (!(depth_scale > 0)) throw InputError("depth scale must be positive");
  if (width <= 0 || height <= 0) throw InputError("image size must be positive");
  if (!(cx > 0 && cx < width) || !(cy > 0 && cy < height)) {
    throw InputError("principal point must lie inside the image");
  }
}

PoseSE3::PoseSE3(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).norm();
  if (ortho > 1e-9) throw InputError("rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw InputError("rotation determinant is not +1");
  }
}

PoseSE3 PoseSE3::exp(const Eigen::Matrix<double, 6, 1>& twist) {
  const Vec3 omega = twist.head<3>();
  const Vec3 v = twist.tail<3>();
  const double theta = omega.norm();
  const Mat3 w = skew(omega);

  double a, b, c;  // coefficients of I + a*W + b*W^2 and V = I + c*W + ...
  if (theta < 1e-8) {
    // Taylor expansions around theta = 0.
    a = 1.0 - theta * theta / 6.0;
    b = 0.5 - theta * theta / 24.0;
    c = 1.0 / 6.0 - theta * theta / 120.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
    c = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  const Mat3 rotation = Mat3::Identity() + a * w + b * w * w;
  const Mat3 V = Mat3::Identity() + b * w + c * w * w;
  // Re-orthonormalize through a quaternion so repeated retractions cannot
  // drift past the constructor tolerance.
  Eigen::Quaterniond q(rotation);
  q.normalize();
  return PoseSE3(q.toRotationMatrix(), V * v);
}

PoseSE3 PoseSE3::inverse() const {
  return PoseSE3(rotation_.transpose(), -(rotation_.transpose() * translation_));
}

PoseSE3 PoseSE3::compose(const PoseSE3& other) const {
  Eigen::Quaterniond q(rotation_ * other.rotation());
  q.normalize();
  return PoseSE3(q.toRotationMatrix(), rotation_ * other.translation() + translation_);
}

double structural_distance(const LineSegment2D& a, const LineSegment2D& b) {
  const double direct = (b.p1 - a.p1).norm() + (b.p2 - a.p2).norm();
  const double swapped = (b.p1 - a.p2).norm() + (b.p2 - a.p1).norm();
  return std::min(direct, swapped);
}

Vec2 orthogonal_projection(const Vec2& p, const LineSegment2D& l) {
  // Anchor on the lexicographically smaller endpoint so the rounding, and
  // with it the result, does not depend on the stored endpoint order.
  const bool flip =
      l.p2[0] < l.p1[0] || (l.p2[0] == l.p1[0] && l.p2[1] < l.p1[1]);
  const Vec2& base = flip ? l.p2 : l.p1;
  const Vec2 d = (flip ? l.p1 : l.p2) - base;
  const double t = (p - base).dot(d) / d.squaredNorm();
  return base + t * d;
}

double orthogonal_distance(const LineSegment2D& a, const LineSegment2D& b) {
  const auto residuals = [](const LineSegment2D& onto, const LineSegment2D& from) {
    return (from.p1 - orthogonal_projection(from.p1, onto)).norm() +
           (from.p2 - orthogonal_projection(from.p2, onto)).norm();
  };
  return 0.5 * (residuals(a, b) + residuals(b, a));
}

double segment_distance(const LineSegment2D& a, const LineSegment2D& b,
                        DistanceKind kind) {
  return kind == DistanceKind::Structural ? structural_distance(a, b)
                                          : orthogonal_distance(a, b);
}

HomogeneousLine2D line_coefficients(const Vec2& p, const Vec2& q) {
  const Vec3 hp(p[0], p[1], 1.0);
  const Vec3 hq(q[0], q[1], 1.0);
  Vec3 l = hp.cross(hq);
  const double norm = l.norm();
  if (norm <= kDegenerateLength) {
    throw InputError("degenerate line: coincident points");
  }
  l /= norm;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(l[i]) > 1e-12) {
      if (l[i] < 0) l = -l;
      break;
    }
  }
  return HomogeneousLine2D{l};
}

Vec2 project_point(const CameraModel& cam, const PoseSE3& pose, const Vec3& point) {
  const Vec3 p = pose.apply(point);
  if (!(p[2] > 0)) {
    throw ComputeError("point behind camera");
  }
  return Vec2(cam.fx * p[0] / p[2] + cam.cx, cam.fy * p[1] / p[2] + cam.cy);
}

std::optional<Vec3> backproject(const CameraModel& cam, const Vec2& pixel,
                                const DepthImage& depth) {
  const long u = std::lround(pixel[0]);
  const long v = std::lround(pixel[1]);
  if (u < 0 || u >= depth.width || v < 0 || v >= depth.height) {
    std::ostringstream msg;
    msg << "pixel (" << pixel[0] << ", " << pixel[1] << ") outside "
        << depth.width << "x" << depth.height << " depth image";
    throw InputError(msg.str());
  }
  const std::uint16_t raw = depth.at(int(u), int(v));
  if (raw == 0) return std::nullopt;
  const double z = double(raw) / cam.depth_scale;
  return Vec3((pixel[0] - cam.cx) * z / cam.fx, (pixel[1] - cam.cy) * z / cam.fy, z);
}

std::optional<LineSegment2D> clip_segment(const LineSegment2D& seg, int width,
                                          int height) {
  // Liang-Barsky against [0, w-1] x [0, h-1].
  const double xmax = width - 1.0;
  const double ymax = height - 1.0;
  const Vec2 d = seg.p2 - seg.p1;
  double t0 = 0.0, t1 = 1.0;
  const double p[4] = {-d[0], d[0], -d[1], d[1]};
  const double q[4] = {seg.p1[0] - 0.0, xmax - seg.p1[0], seg.p1[1] - 0.0,
                       ymax - seg.p1[1]};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;  // parallel and outside
    } else {
      const double r = q[i] / p[i];
      if (p[i] < 0.0) {
        if (r > t1) return std::nullopt;
        t0 = std::max(t0, r);
      } else {
        if (r < t0) return std::nullopt;
        t1 = std::min(t1, r);
      }
    }
  }
  if (t0 > t1) return std::nullopt;
  const Vec2 a = seg.p1 + t0 * d;
  const Vec2 b = seg.p1 + t1 * d;
  if ((a - b).norm() <= 1e-9) return std::nullopt;
  return LineSegment2D(a, b, seg.score, seg.track_id);
}

std::optional<LineSegment2D> reproject_segment(const LineSegment2D& seg,
                                               const DepthImage& depth_src,
                                               const PoseSE3& pose_src,
                                               const PoseSE3& pose_dst,
                                               const CameraModel& cam) {
  const auto a3 = backproject(cam, seg.p1, depth_src);
  const auto b3 = backproject(cam, seg.p2, depth_src);
  if (!a3 || !b3) return std::nullopt;
  const PoseSE3 dst_from_src = pose_dst.inverse().compose(pose_src);
  Vec2 a, b;
  try {
    a = project_point(cam, dst_from_src, *a3);
    b = project_point(cam, dst_from_src, *b3);
  } catch (const ComputeError&) {
    return std::nullopt;
  }
  if ((a - b).norm() <= 1e-9) return std::nullopt;
  return clip_segment(LineSegment2D(a, b, seg.score, seg.track_id), cam.width,
                      cam.height);
}

}  // namespace lineval
