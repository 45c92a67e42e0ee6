#pragma once

#include <vector>

#include "avr/kinematics/joint_chain.hpp"

namespace avr::kin {

struct FkResult {
  // Frame of each joint after its rotation; position is the joint origin.
  std::vector<Pose6> links;
  Pose6 ee;
};

namespace detail {

// Unchecked FK; callers validate q.
inline FkResult forward_unchecked(const JointChain& chain, const JointVector& q) {
  FkResult out;
  out.links.reserve(chain.size());
  Pose6 t = chain.base();
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Link& l = chain.link(i);
    t = t * l.parent_offset;
    t.orientation = t.orientation * axis_angle_quat(l.axis, q[static_cast<Eigen::Index>(i)]);
    out.links.push_back(t);
  }
  out.ee = t * chain.ee_offset();
  return out;
}

inline Jacobian jacobian_from_fk(const JointChain& chain, const FkResult& fk) {
  Jacobian j(6, static_cast<Eigen::Index>(chain.size()));
  const Vec3& p_ee = fk.ee.position;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Vec3 axis = fk.links[i].orientation * chain.link(i).axis;
    const Vec3 lever = p_ee - fk.links[i].position;
    const auto c = static_cast<Eigen::Index>(i);
    j.block<3, 1>(0, c) = axis.cross(lever);
    j.block<3, 1>(3, c) = axis;
  }
  return j;
}

}  // namespace detail

/// Link frames and end-effector pose for joint values `q`.
/// Throws DimensionMismatch, or JointLimitViolation naming the first bad index.
inline FkResult forward_kinematics(const JointChain& chain, const JointVector& q) {
  chain.check_configuration(q);
  return detail::forward_unchecked(chain, q);
}

inline Pose6 end_effector(const JointChain& chain, const JointVector& q) {
  return forward_kinematics(chain, q).ee;
}

/// Geometric Jacobian at the end effector: rows 0-2 linear, rows 3-5 angular,
/// both in the world frame.
inline Jacobian jacobian(const JointChain& chain, const JointVector& q) {
  chain.check_configuration(q);
  return detail::jacobian_from_fk(chain, detail::forward_unchecked(chain, q));
}

}  // namespace avr::kin
