#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "avr/core/geometry.hpp"
#include "avr/core/task.hpp"
#include "avr/kinematics/chain_config.hpp"
#include "avr/kinematics/forward_kinematics.hpp"
#include "avr/robot/profiles.hpp"

namespace avr::robot {

inline constexpr std::size_t kRobotDof = 7;

enum class ToolKind { spoon, cup, scratcher, wipe };

inline const char* to_string(ToolKind t) {
  switch (t) {
    case ToolKind::spoon: return "spoon";
    case ToolKind::cup: return "cup";
    case ToolKind::scratcher: return "scratcher";
    case ToolKind::wipe: return "wipe";
  }
  return "?";
}

inline ToolKind tool_for(Task task) {
  switch (task) {
    case Task::feeding: return ToolKind::spoon;
    case Task::drinking: return ToolKind::cup;
    case Task::scratching: return ToolKind::scratcher;
    case Task::bathing: return ToolKind::wipe;
  }
  return ToolKind::spoon;
}

/// Joint-angle increments, radians.
struct Action {
  std::array<double, kRobotDof> delta{};
};

/// Kinematic description of one robot: chain (base unset), neutral pose,
/// tool offsets and the fixed base pose per task.
struct RobotModel {
  std::string name;
  kin::JointChain chain;
  kin::JointVector neutral_q;
  std::map<ToolKind, Pose6> tools;
  std::map<Task, Pose6> bases;

  const Pose6& tool_offset(ToolKind t) const { return tools.at(t); }
  const Pose6& base(Task t) const { return bases.at(t); }
};

inline RobotModel robot_model_from_toml(const toml::table& root) {
  RobotModel m;
  m.chain = kin::chain_from_toml(root);
  if (m.chain.size() != kRobotDof) throw ConfigError("robot chain must have 7 joints");
  const toml::node_view<const toml::node> view{root};
  m.name = view["name"].value_or(std::string("robot"));

  const toml::array* nq = view["neutral_q"].as_array();
  if (!nq || nq->size() != kRobotDof) throw ConfigError("robot neutral_q must have 7 values");
  m.neutral_q.resize(static_cast<Eigen::Index>(kRobotDof));
  for (std::size_t i = 0; i < kRobotDof; ++i) {
    const auto v = (*nq)[i].value<double>();
    if (!v) throw ConfigError("robot neutral_q must be numeric");
    m.neutral_q[static_cast<Eigen::Index>(i)] = *v;
  }
  m.chain.check_configuration(m.neutral_q);

  for (ToolKind t : {ToolKind::spoon, ToolKind::cup, ToolKind::scratcher, ToolKind::wipe}) {
    const auto node = view["tools"][to_string(t)];
    if (!node) throw ConfigError(std::string("robot profile missing tools.") + to_string(t));
    m.tools[t] = kin::pose_from_toml(node, std::string("tools.") + to_string(t));
  }
  for (Task t : kAllTasks) {
    const auto node = view["bases"][to_string(t)];
    if (!node) throw ConfigError(std::string("robot profile missing bases.") + to_string(t));
    m.bases[t] = kin::pose_from_toml(node, std::string("bases.") + to_string(t));
  }
  return m;
}

inline RobotModel robot_model_from_string(std::string_view text) {
  try {
    return robot_model_from_toml(toml::parse(text));
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string("robot profile: ") + std::string(e.description()));
  }
}

inline std::string_view default_profile_text(RobotProfile p) {
  return p == RobotProfile::armA ? kArmAProfileToml : kArmBProfileToml;
}

inline const RobotModel& default_robot_model(RobotProfile p) {
  static const RobotModel a = robot_model_from_string(kArmAProfileToml);
  static const RobotModel b = robot_model_from_string(kArmBProfileToml);
  return p == RobotProfile::armA ? a : b;
}

/// The robot during an episode: chain with the task's base applied, current
/// joints and the attached tool.
struct RobotState {
  RobotProfile profile = RobotProfile::armA;
  kin::JointChain chain;  // base = task base pose
  kin::JointVector q;
  ToolKind tool = ToolKind::spoon;
  Pose6 tool_offset;

  kin::JointChain tool_chain() const { return chain.with_ee_offset(chain.ee_offset() * tool_offset); }
};

inline RobotState make_robot_state(const RobotModel& model, RobotProfile profile, Task task,
                                   const kin::JointVector& q) {
  RobotState s;
  s.profile = profile;
  s.chain = model.chain.with_base(model.base(task));
  s.tool = tool_for(task);
  s.tool_offset = model.tool_offset(s.tool);
  s.chain.check_configuration(q);
  s.q = q;
  return s;
}

/// q' = clamp(q + clamp(a, +-delta_max), joint limits).
inline RobotState apply_action(const RobotState& state, const Action& a, double delta_max) {
  RobotState next = state;
  for (std::size_t i = 0; i < kRobotDof; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    double d = a.delta[i];
    if (!std::isfinite(d)) d = 0.0;
    next.q[k] = state.q[k] + std::clamp(d, -delta_max, delta_max);
  }
  next.q = next.chain.clamp(next.q);
  return next;
}

/// End-effector pose composed with the tool offset.
inline Pose6 tool_pose(const RobotState& state) {
  return kin::forward_kinematics(state.chain, state.q).ee * state.tool_offset;
}

struct ContactForce {
  double magnitude = 0.0;  // N
  Vec3 location = Vec3::Zero();
  int capsule = -1;  // index into the capsule list, -1 when no contact
};

/// Penalty-spring contact: F = stiffness * deepest penetration of the tool
/// reference point into any capsule.
inline ContactForce contact_force(const Vec3& tool_point, const std::vector<Capsule>& capsules,
                                  double stiffness) {
  ContactForce f;
  f.location = tool_point;
  double deepest = 0.0;
  for (std::size_t i = 0; i < capsules.size(); ++i) {
    const double d = penetration_depth(tool_point, capsules[i]);
    if (d > deepest) {
      deepest = d;
      f.capsule = static_cast<int>(i);
    }
  }
  f.magnitude = stiffness * deepest;
  return f;
}

}  // namespace avr::robot
