#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <optional>
#include <vector>

namespace lineval {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// A line segment observation in pixel coordinates. Zero-length segments are
// rejected at construction since every downstream formula degenerates on them.
struct LineSegment2D {
  Vec2 p1;
  Vec2 p2;
  std::optional<double> score;     // detector confidence in [0, 1]
  std::optional<int> track_id;

  LineSegment2D(const Vec2& a, const Vec2& b,
                std::optional<double> score = std::nullopt,
                std::optional<int> track_id = std::nullopt);

  double length() const { return (p2 - p1).norm(); }
};

// Homogeneous coefficients of a 2D line, unit Euclidean norm, sign fixed so
// that the first nonzero coefficient is positive.
struct HomogeneousLine2D {
  Vec3 coeffs;

  // Signed incidence value l^T (x, y, 1).
  double eval(const Vec2& p) const {
    return coeffs[0] * p[0] + coeffs[1] * p[1] + coeffs[2];
  }
};

// Pinhole intrinsics plus the divisor turning raw depth values into meters.
struct CameraModel {
  double fx, fy;
  double cx, cy;
  double depth_scale;
  int width, height;

  CameraModel(double fx, double fy, double cx, double cy, double depth_scale,
              int width, int height);
};

// Raw depth image; value 0 marks invalid depth.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> values;  // row-major

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), values(size_t(w) * h, 0) {}

  std::uint16_t at(int x, int y) const { return values[size_t(y) * width + x]; }
  std::uint16_t& at(int x, int y) { return values[size_t(y) * width + x]; }
};

// Rigid transform: x_out = R * x_in + t. Orthonormality and det(R) = +1 are
// checked at construction (tolerance 1e-9).
class PoseSE3 {
public:
  PoseSE3() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  PoseSE3(const Mat3& rotation, const Vec3& translation);

  static PoseSE3 identity() { return PoseSE3(); }

  // Exponential map of a 6-vector twist (rotation-vector, translation).
  static PoseSE3 exp(const Eigen::Matrix<double, 6, 1>& twist);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  PoseSE3 inverse() const;
  PoseSE3 compose(const PoseSE3& other) const;  // this * other
  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }

private:
  Mat3 rotation_;
  Vec3 translation_;
};

enum class DistanceKind { Structural, Orthogonal };

// Minimum over the two endpoint pairings of summed endpoint distances.
double structural_distance(const LineSegment2D& a, const LineSegment2D& b);

// Foot of the perpendicular from p onto the infinite line through l.
Vec2 orthogonal_projection(const Vec2& p, const LineSegment2D& l);

// Symmetrized sum of perpendicular residuals of each segment's endpoints
// against the other's infinite line, halved.
double orthogonal_distance(const LineSegment2D& a, const LineSegment2D& b);

double segment_distance(const LineSegment2D& a, const LineSegment2D& b,
                        DistanceKind kind);

// Unit-normalized homogeneous line through two points. Throws on p == q.
HomogeneousLine2D line_coefficients(const Vec2& p, const Vec2& q);

// Pinhole projection of T * P. Throws ComputeError if the transformed point
// has non-positive depth.
Vec2 project_point(const CameraModel& cam, const PoseSE3& pose, const Vec3& point);

// Back-projects a pixel using the depth value at its nearest-integer
// location. Returns nullopt on invalid (zero) depth; throws InputError when
// the pixel is outside the image. No interpolation: annotation endpoints are
// pixel-accurate and interpolating across depth discontinuities creates
// phantom 3D points.
std::optional<Vec3> backproject(const CameraModel& cam, const Vec2& pixel,
                                const DepthImage& depth);

// Clips a segment to the rectangle [0, w-1] x [0, h-1]. Returns nullopt when
// the segment lies fully outside or degenerates to a point.
std::optional<LineSegment2D> clip_segment(const LineSegment2D& seg, int width,
                                          int height);

// Moves a segment from the source frame into the destination frame through
// the depth map: back-project both endpoints, transform by
// pose_dst^-1 * pose_src, project, clip. Poses are world-from-camera.
// Returns nullopt if either endpoint lacks valid depth, lands behind the
// destination camera, or the clipped segment is empty.
std::optional<LineSegment2D> reproject_segment(const LineSegment2D& seg,
                                               const DepthImage& depth_src,
                                               const PoseSE3& pose_src,
                                               const PoseSE3& pose_dst,
                                               const CameraModel& cam);

}  // namespace lineval
