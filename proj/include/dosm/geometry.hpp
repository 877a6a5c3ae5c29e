#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace dosm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Polygon = std::vector<Vec2>;

namespace geometry {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
Scalar cross(const Point2<Scalar>& a, const Point2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

template <typename Scalar>
Scalar point_segment_distance(const Point2<Scalar>& p, const Point2<Scalar>& a,
                              const Point2<Scalar>& b) {
  const Point2<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  if (len2 == Scalar(0)) return (p - a).norm();
  Scalar t = (p - a).dot(ab) / len2;
  t = std::clamp(t, Scalar(0), Scalar(1));
  return (p - (a + t * ab)).norm();
}

/// Shoelace area; positive for counterclockwise vertex order.
double signed_area(std::span<const Vec2> polygon);

/// True when the two closed segments share at least one point.
bool segments_intersect(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2);

/// No two non-adjacent edges touch, and adjacent edges only share their common vertex.
bool is_simple(std::span<const Vec2> polygon);

/// Boundary-inclusive containment test.
bool contains(std::span<const Vec2> polygon, const Vec2& p);

bool on_boundary(std::span<const Vec2> polygon, const Vec2& p, double tol = 1e-12);

}  // namespace geometry
}  // namespace dosm
