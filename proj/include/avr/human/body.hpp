#pragma once

// Kinematic model of the 20-joint avatar.
//
// Frames: z up, the seated person faces +x. `HumanState::body` places the
// waist center W and the furniture orientation (identity for the wheelchair,
// a -90 deg pitch for lying in bed). All joint axes below are in body frame.
//
//   waist: roll about -x, pitch about +y, yaw about +z (torso axis)
//          -> head center at torso_height along the rotated +z
//   head:  yaw (z), pitch (y), roll (x) relative to the torso
//   arms:  shoulder flex (y), abduction (x), humeral rotation (z),
//          elbow (y), forearm roll (z), wrist flex (y), wrist deviation (x);
//          the zero pose hangs the arm along the torso's -z.
//
// The waist roll axis is -x so that head direction for joint angles (r, p) is
// (sin p, cos p sin r, cos p cos r), which inverts the alignment formulas.

#include <array>
#include <vector>

#include "avr/core/geometry.hpp"
#include "avr/human/anthropometrics.hpp"
#include "avr/kinematics/forward_kinematics.hpp"

namespace avr::human {

enum class Side { right = 0, left = 1 };

inline constexpr std::size_t kArmDof = 7;
inline constexpr std::size_t kHumanDof = 20;

using ArmAngles = std::array<double, kArmDof>;
using Angles3 = std::array<double, 3>;

struct JointRange {
  double lo;
  double hi;
  double clamp(double v) const { return std::clamp(v, lo, hi); }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct HumanLimits {
  std::array<JointRange, 3> waist{{{-0.6, 0.6}, {-0.6, 0.8}, {-0.8, 0.8}}};
  std::array<JointRange, 3> head{{{-0.6, 0.6}, {-0.9, 0.9}, {-1.3, 1.3}}};  // roll, pitch, yaw
  std::array<JointRange, kArmDof> right_arm{{{-3.0, 0.9},
                                             {-2.2, 0.4},
                                             {-1.5, 1.5},
                                             {-2.6, 0.0},
                                             {-1.6, 1.6},
                                             {-1.2, 1.2},
                                             {-0.6, 0.6}}};

  std::array<JointRange, kArmDof> arm(Side side) const {
    if (side == Side::right) return right_arm;
    auto out = right_arm;
    out[1] = {-right_arm[1].hi, -right_arm[1].lo};  // abduction mirrors
    return out;
  }
};

inline const HumanLimits& human_limits() {
  static const HumanLimits limits{};
  return limits;
}

struct HumanState {
  Anthropometrics anthro;
  Pose6 body;                   // waist center W and furniture orientation
  Angles3 waist{0.0, 0.0, 0.0};  // roll, pitch, yaw
  Angles3 head{0.0, 0.0, 0.0};   // roll, pitch, yaw
  ArmAngles right_arm{};
  ArmAngles left_arm{};

  ArmAngles& arm(Side s) { return s == Side::right ? right_arm : left_arm; }
  const ArmAngles& arm(Side s) const { return s == Side::right ? right_arm : left_arm; }

  /// waist(3), head(3), right arm(7), left arm(7).
  std::array<double, kHumanDof> joints() const {
    std::array<double, kHumanDof> q{};
    std::copy(waist.begin(), waist.end(), q.begin());
    std::copy(head.begin(), head.end(), q.begin() + 3);
    std::copy(right_arm.begin(), right_arm.end(), q.begin() + 6);
    std::copy(left_arm.begin(), left_arm.end(), q.begin() + 13);
    return q;
  }

  void set_joints(const std::array<double, kHumanDof>& q) {
    std::copy(q.begin(), q.begin() + 3, waist.begin());
    std::copy(q.begin() + 3, q.begin() + 6, head.begin());
    std::copy(q.begin() + 6, q.begin() + 13, right_arm.begin());
    std::copy(q.begin() + 13, q.end(), left_arm.begin());
  }

  bool within_limits(const HumanLimits& lim = human_limits()) const {
    for (std::size_t i = 0; i < 3; ++i) {
      if (!lim.waist[i].contains(waist[i]) || !lim.head[i].contains(head[i])) return false;
    }
    const auto r = lim.arm(Side::right);
    const auto l = lim.arm(Side::left);
    for (std::size_t i = 0; i < kArmDof; ++i) {
      if (!r[i].contains(right_arm[i]) || !l[i].contains(left_arm[i])) return false;
    }
    return true;
  }
};

inline ArmAngles neutral_arm(Side side) {
  // Elbow bent 90 deg, forearm forward, slight abduction.
  const double abd = side == Side::right ? -0.15 : 0.15;
  return {0.0, abd, 0.0, -1.5, 0.0, 0.0, 0.0};
}

inline kin::JointChain waist_chain(const Anthropometrics& a, const Pose6& body) {
  const HumanLimits& lim = human_limits();
  std::vector<kin::Link> links = {
      {"waist_roll", Pose6::identity(), Vec3(-1, 0, 0), lim.waist[0].lo, lim.waist[0].hi},
      {"waist_pitch", Pose6::identity(), Vec3::UnitY(), lim.waist[1].lo, lim.waist[1].hi},
      {"waist_yaw", Pose6::identity(), Vec3::UnitZ(), lim.waist[2].lo, lim.waist[2].hi},
  };
  return kin::JointChain(std::move(links), body, Pose6::from_translation({0, 0, a.torso_height}));
}

/// Torso frame at W after the waist joints; head center is at +z torso_height.
inline Pose6 torso_pose(const Pose6& body, const Angles3& waist) {
  Pose6 t = body;
  t.orientation = t.orientation * axis_angle_quat(Vec3(-1, 0, 0), waist[0]) *
                  axis_angle_quat(Vec3::UnitY(), waist[1]) *
                  axis_angle_quat(Vec3::UnitZ(), waist[2]);
  return t;
}

inline Vec3 head_center(const Anthropometrics& a, const Pose6& torso) {
  return torso.transform_point(Vec3(0, 0, a.torso_height));
}

inline Pose6 head_pose(const Anthropometrics& a, const Pose6& torso, const Angles3& head) {
  Pose6 h;
  h.position = head_center(a, torso);
  h.orientation = torso.orientation * quat_from_rpy(head[0], head[1], head[2]);
  return h;
}

inline kin::JointChain arm_chain(const Anthropometrics& a, const Pose6& torso, Side side) {
  const auto lim = human_limits().arm(side);
  const double y = side == Side::right ? -a.shoulder_half_width : a.shoulder_half_width;
  const Pose6 shoulder = torso * Pose6::from_translation({0.0, y, a.torso_height - a.neck_drop});
  std::vector<kin::Link> links = {
      {"shoulder_flex", Pose6::identity(), Vec3::UnitY(), lim[0].lo, lim[0].hi},
      {"shoulder_abduct", Pose6::identity(), Vec3::UnitX(), lim[1].lo, lim[1].hi},
      {"shoulder_rotate", Pose6::identity(), Vec3::UnitZ(), lim[2].lo, lim[2].hi},
      {"elbow", Pose6::from_translation({0, 0, -a.upper_arm}), Vec3::UnitY(), lim[3].lo,
       lim[3].hi},
      {"forearm_roll", Pose6::identity(), Vec3::UnitZ(), lim[4].lo, lim[4].hi},
      {"wrist_flex", Pose6::from_translation({0, 0, -a.forearm}), Vec3::UnitY(), lim[5].lo,
       lim[5].hi},
      {"wrist_deviate", Pose6::identity(), Vec3::UnitX(), lim[6].lo, lim[6].hi},
  };
  return kin::JointChain(std::move(links), shoulder, Pose6::from_translation({0, 0, -a.hand}));
}

inline kin::JointVector to_vector(const ArmAngles& q) {
  kin::JointVector v(static_cast<Eigen::Index>(kArmDof));
  for (std::size_t i = 0; i < kArmDof; ++i) v[static_cast<Eigen::Index>(i)] = q[i];
  return v;
}

inline ArmAngles to_arm_angles(const kin::JointVector& v) {
  if (static_cast<std::size_t>(v.size()) != kArmDof) throw DimensionMismatch(kArmDof, v.size());
  ArmAngles q{};
  for (std::size_t i = 0; i < kArmDof; ++i) q[i] = v[static_cast<Eigen::Index>(i)];
  return q;
}

struct ArmGeometry {
  Vec3 shoulder;
  Vec3 elbow;
  Vec3 wrist;
  Pose6 hand;          // end of the hand segment
  Pose6 upper_frame;   // frame after humeral rotation; z along the upper arm
  Pose6 forearm_frame; // frame after forearm roll; z along the forearm
};

inline ArmGeometry arm_geometry(const HumanState& s, const Pose6& torso, Side side) {
  const kin::JointChain chain = arm_chain(s.anthro, torso, side);
  const kin::FkResult fk = kin::detail::forward_unchecked(chain, to_vector(s.arm(side)));
  ArmGeometry g;
  g.shoulder = fk.links[0].position;
  g.upper_frame = fk.links[2];
  g.elbow = fk.links[3].position;
  g.forearm_frame = fk.links[4];
  g.wrist = fk.links[5].position;
  g.hand = fk.ee;
  return g;
}

struct BodyGeometry {
  Pose6 torso;
  Pose6 head;  // position = head center
  Vec3 waist = Vec3::Zero();
  Vec3 mouth = Vec3::Zero();
  std::array<ArmGeometry, 2> arms{};
  std::vector<Capsule> capsules;

  const ArmGeometry& arm(Side s) const { return arms[static_cast<std::size_t>(s)]; }
};

inline Vec3 mouth_point(const Pose6& head) { return head.transform_point(Vec3(kMouthForward, 0, 0)); }

inline BodyGeometry body_geometry(const HumanState& s) {
  BodyGeometry g;
  const Anthropometrics& a = s.anthro;
  g.torso = torso_pose(s.body, s.waist);
  g.head = head_pose(a, g.torso, s.head);
  g.waist = s.body.position;
  g.mouth = mouth_point(g.head);
  g.arms[0] = arm_geometry(s, g.torso, Side::right);
  g.arms[1] = arm_geometry(s, g.torso, Side::left);

  const Vec3 neck = g.torso.transform_point(Vec3(0, 0, a.torso_height - a.neck_drop));
  g.capsules.push_back({"torso", g.waist, neck, a.torso_radius});
  g.capsules.push_back({"head", g.head.position, g.head.position, a.head_radius});
  const char* names[2][3] = {{"right_upper_arm", "right_forearm", "right_hand"},
                             {"left_upper_arm", "left_forearm", "left_hand"}};
  for (std::size_t k = 0; k < 2; ++k) {
    const ArmGeometry& arm = g.arms[k];
    g.capsules.push_back({names[k][0], arm.shoulder, arm.elbow, a.upper_arm_radius});
    g.capsules.push_back({names[k][1], arm.elbow, arm.wrist, a.forearm_radius});
    g.capsules.push_back({names[k][2], arm.wrist, arm.hand.position, a.hand_radius});
  }
  return g;
}

}  // namespace avr::human
