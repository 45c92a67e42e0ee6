#pragma once

// JSON form of EnvState. Derived geometry is omitted and rebuilt on load.
// Doubles round-trip exactly, so equal dumps mean bitwise-equal states.

#include <nlohmann/json.hpp>

#include "avr/envs/env.hpp"

namespace avr::envs {

namespace ser_detail {

inline nlohmann::json vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

inline Vec3 vec(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw SchemaError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline nlohmann::json pose(const Pose6& p) {
  const Quat& q = p.orientation;
  return {{"p", vec(p.position)}, {"q", {q.x(), q.y(), q.z(), q.w()}}};
}

inline Pose6 pose(const nlohmann::json& j) {
  const auto& q = j.at("q");
  if (!q.is_array() || q.size() != 4) throw SchemaError("expected a quaternion [x,y,z,w]");
  return {vec(j.at("p")), Quat(q[3].get<double>(), q[0].get<double>(), q[1].get<double>(), q[2].get<double>())};
}

inline nlohmann::json anchor(const SurfaceAnchor& a) {
  return {{"segment", static_cast<int>(a.segment)}, {"s", a.s}, {"n", vec(a.normal_local)}};
}

inline SurfaceAnchor anchor(const nlohmann::json& j) {
  SurfaceAnchor a;
  const int seg = j.at("segment").get<int>();
  if (seg != 0 && seg != 1) throw SchemaError("arm segment must be 0 or 1");
  a.segment = static_cast<ArmSegment>(seg);
  a.s = j.at("s").get<double>();
  a.normal_local = vec(j.at("n"));
  return a;
}

}  // namespace ser_detail

inline nlohmann::json anthro_to_json(const human::Anthropometrics& a) {
  return {{"sex", human::to_string(a.sex)},
          {"torso_height", a.torso_height},
          {"neck_drop", a.neck_drop},
          {"shoulder_half_width", a.shoulder_half_width},
          {"upper_arm", a.upper_arm},
          {"forearm", a.forearm},
          {"hand", a.hand},
          {"torso_radius", a.torso_radius},
          {"upper_arm_radius", a.upper_arm_radius},
          {"forearm_radius", a.forearm_radius},
          {"hand_radius", a.hand_radius},
          {"head_radius", a.head_radius},
          {"total_height_scale", a.total_height_scale}};
}

inline human::Anthropometrics anthro_from_json(const nlohmann::json& j) {
  human::Anthropometrics a;
  a.sex = human::sex_from_string(j.at("sex").get<std::string>());
  a.torso_height = j.at("torso_height").get<double>();
  a.neck_drop = j.at("neck_drop").get<double>();
  a.shoulder_half_width = j.at("shoulder_half_width").get<double>();
  a.upper_arm = j.at("upper_arm").get<double>();
  a.forearm = j.at("forearm").get<double>();
  a.hand = j.at("hand").get<double>();
  a.torso_radius = j.at("torso_radius").get<double>();
  a.upper_arm_radius = j.at("upper_arm_radius").get<double>();
  a.forearm_radius = j.at("forearm_radius").get<double>();
  a.hand_radius = j.at("hand_radius").get<double>();
  a.head_radius = j.at("head_radius").get<double>();
  a.total_height_scale = j.at("total_height_scale").get<double>();
  return a;
}

inline nlohmann::json human_to_json(const human::HumanState& h) {
  return {{"anthro", anthro_to_json(h.anthro)}, {"body", ser_detail::pose(h.body)}, {"joints", h.joints()}};
}

inline human::HumanState human_from_json(const nlohmann::json& j) {
  human::HumanState h;
  h.anthro = anthro_from_json(j.at("anthro"));
  h.body = ser_detail::pose(j.at("body"));
  const auto q = j.at("joints").get<std::vector<double>>();
  if (q.size() != human::kHumanDof) throw DimensionMismatch(human::kHumanDof, q.size());
  std::array<double, human::kHumanDof> a{};
  std::copy(q.begin(), q.end(), a.begin());
  h.set_joints(a);
  return h;
}

inline nlohmann::json to_json(const EnvState& s) {
  using namespace ser_detail;
  nlohmann::json j;
  j["task"] = to_string(s.task);
  j["profile"] = to_string(s.robot.profile);
  j["biomech"] = human::to_string(s.biomech);
  j["source"] = s.source == HumanSource::live ? "live" : "static";
  j["human"] = human_to_json(s.human);
  j["robot_q"] = std::vector<double>(s.robot.q.data(), s.robot.q.data() + s.robot.q.size());
  j["tool"] = pose(s.tool);
  j["prev_tool"] = vec(s.prev_tool);
  j["force"] = s.force;
  j["particles"] = nlohmann::json::array();
  for (const Particle& p : s.particles) {
    j["particles"].push_back({{"p", vec(p.position)},
                              {"v", vec(p.velocity)},
                              {"status", to_string(p.status)},
                              {"local", vec(p.local)},
                              {"release", p.release_angle}});
  }
  j["markers"] = nlohmann::json::array();
  for (const Marker& m : s.markers) {
    j["markers"].push_back({{"anchor", anchor(m.anchor)}, {"wiped", m.wiped}});
  }
  if (s.task == Task::scratching) j["itch"] = anchor(s.itch_anchor);
  j["scratch_count"] = s.scratch_count;
  j["t"] = s.t;
  j["cumulative_reward"] = s.cumulative_reward;
  return j;
}

/// Rebuilds a state for `env` (which supplies the robot model).
inline EnvState env_state_from_json(const nlohmann::json& j, const AssistEnv& env) {
  using namespace ser_detail;
  EnvState s;
  try {
    s.task = task_from_string(j.at("task").get<std::string>());
    const RobotProfile prof = profile_from_string(j.at("profile").get<std::string>());
    if (prof != env.profile()) throw ValidationError("state profile does not match environment");
    s.biomech = human::biomech_mode_from_string(j.at("biomech").get<std::string>());
    s.source = j.at("source").get<std::string>() == "live" ? HumanSource::live : HumanSource::static_sampled;
    s.human = human_from_json(j.at("human"));
    const auto q = j.at("robot_q").get<std::vector<double>>();
    s.robot = robot::make_robot_state(env.config().robot_model(prof), prof, s.task,
                                      Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size())));
    s.tool = pose(j.at("tool"));
    s.prev_tool = vec(j.at("prev_tool"));
    s.force = j.at("force").get<double>();
    for (const auto& p : j.at("particles")) {
      Particle x;
      x.position = vec(p.at("p"));
      x.velocity = vec(p.at("v"));
      x.status = particle_status_from_string(p.at("status").get<std::string>());
      x.local = vec(p.at("local"));
      x.release_angle = p.at("release").get<double>();
      s.particles.push_back(x);
    }
    for (const auto& m : j.at("markers")) {
      Marker x;
      x.anchor = anchor(m.at("anchor"));
      x.wiped = m.at("wiped").get<bool>();
      s.markers.push_back(x);
    }
    if (s.task == Task::scratching) s.itch_anchor = anchor(j.at("itch"));
    s.scratch_count = j.at("scratch_count").get<int>();
    s.t = j.at("t").get<int>();
    s.cumulative_reward = j.at("cumulative_reward").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("env state: ") + e.what());
  }
  refresh_human(s);
  return s;
}

}  // namespace avr::envs
