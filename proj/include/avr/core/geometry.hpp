#pragma once

#include <algorithm>
#include <string>

#include "avr/core/pose.hpp"

namespace avr {

/// Segment a-b swept by a sphere; a == b gives a sphere.
struct Capsule {
  std::string name;
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

inline Vec3 closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

inline double distance_point_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  return (p - closest_point_on_segment(p, a, b)).norm();
}

/// Minimum distance between point `c` and segment p0-p1 (swept-point test).
inline double distance_segment_point(const Vec3& p0, const Vec3& p1, const Vec3& c) {
  return distance_point_segment(c, p0, p1);
}

/// Depth of `p` inside the capsule (0 when outside or on the surface).
inline double penetration_depth(const Vec3& p, const Capsule& c) {
  return std::max(0.0, c.radius - distance_point_segment(p, c.a, c.b));
}

}  // namespace avr
