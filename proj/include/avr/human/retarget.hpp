#pragma once

// Headset/controller poses -> avatar joint angles.

#include <cmath>

#include "avr/human/body.hpp"
#include "avr/human/tracked_input.hpp"
#include "avr/kinematics/ik_dls.hpp"

namespace avr::human {

class NonPositiveHeight : public Error {
 public:
  explicit NonPositiveHeight(const std::string& what) : Error("NonPositiveHeight", what) {}
};

class DegenerateVector : public Error {
 public:
  explicit DegenerateVector(const std::string& what) : Error("DegenerateVector", what) {}
};

/// Ratio of measured headset height above the floor to the avatar's default
/// head height. Multiply segment lengths by it (see `scaled`).
inline double estimate_height_scale(const Vec3& headset_position, double default_head_height) {
  if (!(headset_position.z() > 0.0)) throw NonPositiveHeight("headset height must be > 0");
  if (!(default_head_height > 0.0)) throw NonPositiveHeight("default head height must be > 0");
  return headset_position.z() / default_head_height;
}

// atan2 with atan2(0, 0) := 0.
inline double atan2_zero(double y, double x) {
  if (y == 0.0 && x == 0.0) return 0.0;
  return std::atan2(y, x);
}

struct WaistAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;  // y_psi; only used as the subtrahend in split_yaw
};

/// Waist roll/pitch/yaw from psi = chi - W (both in the body frame):
///   r = atan2(psi_y, psi_z)
///   p = atan2(psi_x cos r, psi_z)
///   y = atan2(cos r, sin r sin p)
inline WaistAngles align_waist(const Vec3& chi, const Vec3& waist_center) {
  const Vec3 psi = chi - waist_center;
  if (psi.norm() < 1e-3) throw DegenerateVector("head center within 1 mm of waist center");
  WaistAngles w;
  w.roll = atan2_zero(psi.y(), psi.z());
  // cos r and sin r taken from psi directly rather than from the rounded
  // angle, so r = pi/2 gives cos r = 0 exactly instead of 6e-17.
  const double ryz = std::hypot(psi.y(), psi.z());
  const double cr = ryz > 0.0 ? psi.z() / ryz : 1.0;
  const double sr = ryz > 0.0 ? psi.y() / ryz : 0.0;
  w.pitch = atan2_zero(psi.x() * cr, psi.z());
  w.yaw = atan2_zero(cr, sr * std::sin(w.pitch));
  return w;
}

struct HeadAlignment {
  double roll = 0.0;
  double pitch = 0.0;
  bool clamped = false;
};

/// Head roll/pitch copied from the headset angles, clamped to the model
/// limits. Yaw goes through split_yaw.
inline HeadAlignment align_head(const Angles3& theta, const HumanLimits& lim = human_limits()) {
  HeadAlignment h;
  h.roll = lim.head[0].clamp(theta[0]);
  h.pitch = lim.head[1].clamp(theta[1]);
  h.clamped = h.roll != theta[0] || h.pitch != theta[1];
  return h;
}

struct YawSplit {
  double head = 0.0;
  double waist = 0.0;
};

inline constexpr double kHeadYawShare = 0.7;
inline constexpr double kWaistYawShare = 0.3;

/// Distributes the head yaw relative to the waist: 70% head, 30% waist.
inline YawSplit split_yaw(double theta_yaw, double waist_yaw_psi) {
  const double d = theta_yaw - waist_yaw_psi;
  return {kHeadYawShare * d, kWaistYawShare * d};
}

/// Headset (roll, pitch, yaw) in the tracking convention: rpy of the headset
/// orientation in the body frame, with yaw reported relative to the body's
/// +y axis (facing body +x reads yaw = pi/2), which is the reference the
/// waist yaw formula uses for an upright torso.
inline Angles3 headset_angles(const Quat& headset_world, const Pose6& body) {
  const Vec3 rpy = rpy_from_quat(body.orientation.conjugate() * headset_world);
  return {rpy.x(), rpy.y(), rpy.z() + kTrackingYawOffset};
}

struct ArmRetarget {
  ArmAngles q{};
  bool reached = false;
  double position_residual = 0.0;
  double orientation_residual = 0.0;
};

/// 7-DoF arm angles placing the avatar hand at `hand`, warm-started from
/// `previous`. Uses the state's current anthropometrics and waist.
inline ArmRetarget retarget_arm(const HumanState& state, const Pose6& hand, Side side,
                                const ArmAngles& previous, const kin::IkParams& params = {}) {
  const kin::JointChain chain = arm_chain(state.anthro, torso_pose(state.body, state.waist), side);
  const kin::JointVector seed = chain.clamp(to_vector(previous));
  const kin::IkResult r = kin::ik_dls(chain, seed, {hand.position, normalized(hand.orientation)},
                                      params);
  return {to_arm_angles(r.q), r.converged, r.position_residual, r.orientation_residual};
}

struct RetargetFlags {
  bool waist_degenerate = false;
  bool waist_clamped = false;
  bool head_clamped = false;
  bool right_unreached = false;
  bool left_unreached = false;

  bool any() const {
    return waist_degenerate || waist_clamped || head_clamped || right_unreached || left_unreached;
  }
};

struct RetargetResult {
  HumanState state;
  RetargetFlags flags;
};

/// One full retargeting frame. Pure in (previous, input): identical inputs
/// give bitwise-identical outputs. Every output joint is within limits.
inline RetargetResult retarget_frame(const HumanState& previous, const TrackedInput& input,
                                     const kin::IkParams& ik = {}) {
  const HumanLimits& lim = human_limits();
  RetargetResult out{previous, {}};
  HumanState& s = out.state;

  const Pose6 body_inv = s.body.inverse();
  const Vec3 chi_body = body_inv.transform_point(input.head.position);
  double waist_psi_yaw = previous.waist[2];
  try {
    const WaistAngles w = align_waist(chi_body, Vec3::Zero());
    s.waist[0] = lim.waist[0].clamp(w.roll);
    s.waist[1] = lim.waist[1].clamp(w.pitch);
    out.flags.waist_clamped = s.waist[0] != w.roll || s.waist[1] != w.pitch;
    waist_psi_yaw = w.yaw;
  } catch (const DegenerateVector&) {
    out.flags.waist_degenerate = true;
  }

  const Angles3 theta = headset_angles(input.head.orientation, s.body);
  const HeadAlignment h = align_head(theta, lim);
  s.head[0] = h.roll;
  s.head[1] = h.pitch;
  out.flags.head_clamped = h.clamped;

  if (!out.flags.waist_degenerate) {
    const YawSplit y = split_yaw(theta[2], waist_psi_yaw);
    s.head[2] = lim.head[2].clamp(y.head);
    s.waist[2] = lim.waist[2].clamp(y.waist);
    out.flags.head_clamped = out.flags.head_clamped || s.head[2] != y.head;
    out.flags.waist_clamped = out.flags.waist_clamped || s.waist[2] != y.waist;
  }

  const ArmRetarget right = retarget_arm(s, input.right, Side::right, previous.right_arm, ik);
  const ArmRetarget left = retarget_arm(s, input.left, Side::left, previous.left_arm, ik);
  s.right_arm = right.q;
  s.left_arm = left.q;
  out.flags.right_unreached = !right.reached;
  out.flags.left_unreached = !left.reached;
  return out;
}

}  // namespace avr::human
