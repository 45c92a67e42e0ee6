#pragma once

// Points anchored on the right-arm surface (markers, itch). An anchor is
// stored in the segment's own frame, so it follows the arm when the live
// avatar moves.

#include <cmath>
#include <vector>

#include "avr/core/rng.hpp"
#include "avr/human/body.hpp"

namespace avr::envs {

enum class ArmSegment { upper = 0, forearm = 1 };

struct SurfaceAnchor {
  ArmSegment segment = ArmSegment::upper;
  double s = 0.0;                      // meters from the segment's proximal joint
  Vec3 normal_local = Vec3::UnitX();   // unit, perpendicular to the segment axis (local z)
};

struct SurfacePoint {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();
};

inline double segment_length(const human::Anthropometrics& a, ArmSegment seg) {
  return seg == ArmSegment::upper ? a.upper_arm : a.forearm;
}

inline double segment_radius(const human::Anthropometrics& a, ArmSegment seg) {
  return seg == ArmSegment::upper ? a.upper_arm_radius : a.forearm_radius;
}

inline SurfacePoint resolve(const SurfaceAnchor& anchor, const human::Anthropometrics& a,
                            const human::ArmGeometry& arm) {
  const Pose6& frame = anchor.segment == ArmSegment::upper ? arm.upper_frame : arm.forearm_frame;
  const Mat3 R = frame.rotation();
  SurfacePoint p;
  p.normal = R * anchor.normal_local;
  p.position = frame.position + R * Vec3(0, 0, -anchor.s) + segment_radius(a, anchor.segment) * p.normal;
  return p;
}

/// Local normal pointing toward world `up` projected off the segment axis,
/// rotated by `angle` about the axis.
inline Vec3 local_normal_toward(const Pose6& frame, const Vec3& up, double angle) {
  Vec3 local = frame.rotation().transpose() * up;
  local.z() = 0.0;
  if (local.norm() < 1e-9) local = Vec3::UnitX();
  local.normalize();
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()) * local;
}

/// Marker rows laid along the shoulder-elbow-wrist polyline at fixed arc
/// spacing. Row k sits at angle (k - (rows-1)/2) * row_angle from the top.
inline std::vector<SurfaceAnchor> marker_anchors(const human::Anthropometrics& a, const human::ArmGeometry& arm,
                                                 int count, int rows, double spacing, double start,
                                                 double row_angle) {
  std::vector<SurfaceAnchor> out;
  const int per_row = count / rows;
  const Vec3 up = Vec3::UnitZ();
  for (int r = 0; r < rows; ++r) {
    const double angle = (r - 0.5 * (rows - 1)) * 2.0 * row_angle / std::max(1, rows - 1);
    for (int k = 0; k < per_row; ++k) {
      double arc = start + spacing * k;
      SurfaceAnchor m;
      if (arc <= a.upper_arm) {
        m.segment = ArmSegment::upper;
        m.s = arc;
      } else {
        m.segment = ArmSegment::forearm;
        m.s = std::min(arc - a.upper_arm, a.forearm);
      }
      const Pose6& frame = m.segment == ArmSegment::upper ? arm.upper_frame : arm.forearm_frame;
      m.normal_local = local_normal_toward(frame, up, angle);
      out.push_back(m);
    }
  }
  return out;
}

/// Uniform over the lateral surface of the two arm cylinders.
inline SurfaceAnchor sample_surface_anchor(Rng& rng, const human::Anthropometrics& a) {
  const double area_upper = a.upper_arm * a.upper_arm_radius;
  const double area_fore = a.forearm * a.forearm_radius;
  SurfaceAnchor m;
  m.segment = uniform(rng, 0.0, area_upper + area_fore) < area_upper ? ArmSegment::upper : ArmSegment::forearm;
  m.s = uniform(rng, 0.0, segment_length(a, m.segment));
  const double phi = uniform(rng, -kPi, kPi);
  m.normal_local = Vec3(std::cos(phi), std::sin(phi), 0.0);
  return m;
}

}  // namespace avr::envs
