#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

#include "avr/core/errors.hpp"

namespace avr {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kUnitTolerance = 1e-9;

/// Rigid-body pose: position in meters, unit-quaternion orientation.
struct Pose6 {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  static Pose6 identity() { return {}; }
  static Pose6 from_translation(const Vec3& p) { return {p, Quat::Identity()}; }

  Mat3 rotation() const { return orientation.toRotationMatrix(); }

  Eigen::Isometry3d isometry() const {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = rotation();
    t.translation() = position;
    return t;
  }

  Vec3 transform_point(const Vec3& local) const { return position + orientation * local; }

  Pose6 inverse() const {
    const Quat inv = orientation.conjugate();
    return {-(inv * position), inv};
  }

  bool is_normalized(double tol = kUnitTolerance) const {
    return std::abs(orientation.norm() - 1.0) <= tol;
  }
};

// Composition a ∘ b: express b (given in a's frame) in a's parent frame.
inline Pose6 operator*(const Pose6& a, const Pose6& b) {
  Pose6 out;
  out.position = a.position + a.orientation * b.position;
  out.orientation = a.orientation * b.orientation;
  return out;
}

inline Quat normalized(const Quat& q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw ValidationError("quaternion has zero or non-finite norm");
  }
  return Quat(q.w() / n, q.x() / n, q.y() / n, q.z() / n);
}

inline Quat axis_angle_quat(const Vec3& unit_axis, double angle) {
  return Quat(Eigen::AngleAxisd(angle, unit_axis));
}

// Roll-pitch-yaw with R = Rz(yaw) * Ry(pitch) * Rx(roll).
inline Quat quat_from_rpy(double roll, double pitch, double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
              Eigen::AngleAxisd(roll, Vec3::UnitX()));
}

inline Vec3 rpy_from_quat(const Quat& q) {
  const Mat3 r = q.normalized().toRotationMatrix();
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double roll = 0.0;
  double yaw = 0.0;
  if (std::abs(r(2, 0)) < 1.0 - 1e-12) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    // Gimbal lock: fold everything into yaw.
    yaw = std::atan2(-r(0, 1), r(1, 1));
  }
  return {roll, pitch, yaw};
}

/// Rotation vector (axis * angle) of a unit quaternion, angle in [0, pi].
/// Uses the series form near identity so it stays accurate for tiny angles.
inline Vec3 rotation_vector(const Quat& q_in) {
  Quat q = q_in;
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-8) {
    // angle ~ 2 s, so axis*angle ~ 2 v / w (first order, w ~ 1).
    return 2.0 * v / q.w();
  }
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

/// Orientation error taking `current` onto `target`, as a world-frame
/// rotation vector of target * current^-1.
inline Vec3 orientation_error(const Quat& target, const Quat& current) {
  return rotation_vector(target * current.conjugate());
}

inline double angle_between(const Quat& a, const Quat& b) {
  return rotation_vector(a * b.conjugate()).norm();
}

}  // namespace avr
