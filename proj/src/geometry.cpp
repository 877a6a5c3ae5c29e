#include "dosm/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace dosm::geometry {

namespace {

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross<double>(b - a, c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

}  // namespace

double signed_area(std::span<const Vec2> polygon) {
  double twice = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross<double>(polygon[i], polygon[(i + 1) % n]);
  }
  return 0.5 * twice;
}

bool segments_intersect(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2) {
  const int o1 = orientation(a1, a2, b1);
  const int o2 = orientation(a1, a2, b2);
  const int o3 = orientation(b1, b2, a1);
  const int o4 = orientation(b1, b2, a2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a1, a2, b1)) return true;
  if (o2 == 0 && on_segment(a1, a2, b2)) return true;
  if (o3 == 0 && on_segment(b1, b2, a1)) return true;
  if (o4 == 0 && on_segment(b1, b2, a2)) return true;
  return false;
}

bool is_simple(std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a1 = polygon[i];
    const Vec2& a2 = polygon[(i + 1) % n];
    if (a1 == a2) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2& b1 = polygon[j];
      const Vec2& b2 = polygon[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges may only share their joint vertex: reject folding back on itself.
        const Vec2& shared = (j == i + 1) ? a2 : a1;
        const Vec2& other_a = (j == i + 1) ? a1 : a2;
        const Vec2& other_b = (j == i + 1) ? b2 : b1;
        if (orientation(other_a, shared, other_b) == 0 &&
            (other_a - shared).dot(other_b - shared) > 0) {
          return false;
        }
        continue;
      }
      if (segments_intersect(a1, a2, b1, b2)) return false;
    }
  }
  return true;
}

bool on_boundary(std::span<const Vec2> polygon, const Vec2& p, double tol) {
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (point_segment_distance<double>(p, polygon[i], polygon[(i + 1) % n]) <= tol) return true;
  }
  return false;
}

bool contains(std::span<const Vec2> polygon, const Vec2& p) {
  if (polygon.size() < 3) return false;
  if (on_boundary(polygon, p)) return true;
  // Crossing-number test with half-open edge rule.
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_at = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x_at) inside = !inside;
    }
  }
  return inside;
}

}  // namespace dosm::geometry
