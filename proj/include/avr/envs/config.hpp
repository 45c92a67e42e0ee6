#pragma once

// Environment configuration. Defaults are compiled in; config/env.toml ships
// the same values. Every field may be overridden from a TOML file with
// `schema_version = 1`. The config hash covers all fields plus the robot
// profile texts and is stamped into episode records.

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

#include "avr/core/hash.hpp"
#include "avr/core/task.hpp"
#include "avr/human/anthropometrics.hpp"
#include "avr/kinematics/chain_config.hpp"
#include "avr/robot/robot.hpp"

namespace avr::envs {

inline constexpr std::int64_t kEnvSchemaVersion = 1;

inline double deg(double d) { return d * kPi / 180.0; }

struct EpisodeConfig {
  int steps = 200;
  double dt = 0.1;
};

struct RobotConfig {
  double delta_max = 0.05;          // rad per step
  double contact_stiffness = 1000;  // N/m
};

struct ParticleConfig {
  int food = 8;
  int water = 50;
  double mouth_capture_radius = 0.04;
  double spoon_release_angle = deg(60);
  double cup_pour_angle_min = deg(30);
  double cup_pour_angle_max = deg(110);
  double spill_drop = 0.20;
  double gravity = 9.81;
  double spoon_radius = 0.012;
  double cup_radius = 0.03;
  double cup_height = 0.08;
};

struct MarkerConfig {
  int count = 24;
  int rows = 2;
  double spacing = 0.03;
  double start = 0.14;    // arc length from the shoulder to the first marker
  double row_angle = 0.35;  // rows sit at +-row_angle around the arm's top
};

struct RewardConfig {
  double distance_weight = 1.0;
  double capture_bonus = 20.0;
  double spill_penalty = 5.0;
  double scratch_bonus = 2.0;
  double wipe_bonus = 5.0;
  double force_weight = 1.0;
  double force_cap = 20.0;
  double itch_force_cap = 10.0;
  double near_itch_radius = 0.10;
  double tilt_weight = 1.0;
  double tilt_gate = 0.15;
  double scratch_radius = 0.025;
  double scratch_min_tangential = 0.01;
  double wipe_radius = 0.02;
  double wipe_max_angle = deg(45);
};

struct HumanConfig {
  std::string sex = "random";  // random | male | female
  Pose6 wheelchair{Vec3(0.0, 0.0, 0.70), Quat::Identity()};
  Pose6 bed{Vec3(0.0, 0.0, 0.62), quat_from_rpy(0.0, -kPi / 2.0, 0.0)};
  std::array<double, 3> head_randomization{0.2, 0.2, 0.3};  // roll, pitch, yaw half-ranges
  double arm_randomization = 0.25;
};

struct TaskConfig {
  Pose6 tool_start;
};

struct EnvConfig {
  EpisodeConfig episode;
  RobotConfig robot;
  ParticleConfig particles;
  MarkerConfig markers;
  RewardConfig reward;
  HumanConfig human;
  std::map<Task, TaskConfig> tasks{
      {Task::feeding, {{Vec3(0.35, -0.15, 1.10), Quat::Identity()}}},
      {Task::drinking, {{Vec3(0.35, -0.15, 1.10), Quat::Identity()}}},
      {Task::scratching, {{Vec3(0.30, -0.40, 1.05), quat_from_rpy(kPi, 0, 0)}}},
      {Task::bathing, {{Vec3(-0.15, -0.30, 0.85), Quat::Identity()}}},
  };
  std::map<RobotProfile, std::string> robot_profiles{
      {RobotProfile::armA, std::string(robot::kArmAProfileToml)},
      {RobotProfile::armB, std::string(robot::kArmBProfileToml)},
  };

  bool bed(Task t) const { return t == Task::bathing; }
  const Pose6& body_pose(Task t) const { return bed(t) ? human.bed : human.wheelchair; }

  const robot::RobotModel& robot_model(RobotProfile p) const {
    auto it = models_.find(p);
    if (it == models_.end()) {
      it = models_.emplace(p, robot::robot_model_from_string(robot_profiles.at(p))).first;
    }
    return it->second;
  }

  void validate() const;
  nlohmann::json to_json() const;
  std::string hash() const { return hash_hex(to_json().dump()); }

 private:
  mutable std::map<RobotProfile, robot::RobotModel> models_;
};

namespace config_detail {

inline nlohmann::json pose_json(const Pose6& p) {
  const Quat& q = p.orientation;
  return {{"xyz", {p.position.x(), p.position.y(), p.position.z()}},
          {"q", {q.x(), q.y(), q.z(), q.w()}}};
}

template <typename T>
void read(const toml::node_view<const toml::node>& t, const char* key, T& out) {
  const auto node = t[key];
  if (!node) return;
  if constexpr (std::is_same_v<T, std::string>) {
    const auto v = node.template value<std::string>();
    if (!v) throw ConfigError(std::string("'") + key + "' must be a string");
    out = *v;
  } else if constexpr (std::is_integral_v<T>) {
    const auto v = node.template value<std::int64_t>();
    if (!v) throw ConfigError(std::string("'") + key + "' must be an integer");
    out = static_cast<T>(*v);
  } else {
    const auto v = node.template value<double>();
    if (!v) throw ConfigError(std::string("'") + key + "' must be a number");
    out = *v;
  }
}

}  // namespace config_detail

inline void EnvConfig::validate() const {
  if (episode.steps <= 0 || !(episode.dt > 0.0)) throw ConfigError("episode steps/dt must be > 0");
  if (!(robot.delta_max > 0.0) || !(robot.contact_stiffness >= 0.0)) {
    throw ConfigError("robot delta_max must be > 0 and stiffness >= 0");
  }
  if (particles.food <= 0 || particles.water <= 0) throw ConfigError("particle counts must be > 0");
  if (!(particles.mouth_capture_radius > 0.0)) throw ConfigError("capture radius must be > 0");
  if (!(particles.cup_pour_angle_min <= particles.cup_pour_angle_max)) {
    throw ConfigError("cup pour angles must satisfy min <= max");
  }
  if (markers.count <= 0 || markers.rows <= 0 || markers.count % markers.rows != 0) {
    throw ConfigError("marker count must be a positive multiple of rows");
  }
  if (!(markers.spacing > 0.0)) throw ConfigError("marker spacing must be > 0");
  if (human.sex != "random" && human.sex != "male" && human.sex != "female") {
    throw ConfigError("human.sex must be random|male|female");
  }
  for (Task t : kAllTasks) {
    if (!tasks.count(t)) throw ConfigError(std::string("missing task config ") + to_string(t));
  }
  for (RobotProfile p : kAllProfiles) robot_model(p);
}

inline nlohmann::json EnvConfig::to_json() const {
  using config_detail::pose_json;
  nlohmann::json j;
  j["schema_version"] = kEnvSchemaVersion;
  j["episode"] = {{"steps", episode.steps}, {"dt", episode.dt}};
  j["robot"] = {{"delta_max", robot.delta_max}, {"contact_stiffness", robot.contact_stiffness}};
  j["particles"] = {{"food", particles.food},
                    {"water", particles.water},
                    {"mouth_capture_radius", particles.mouth_capture_radius},
                    {"spoon_release_angle", particles.spoon_release_angle},
                    {"cup_pour_angle_min", particles.cup_pour_angle_min},
                    {"cup_pour_angle_max", particles.cup_pour_angle_max},
                    {"spill_drop", particles.spill_drop},
                    {"gravity", particles.gravity},
                    {"spoon_radius", particles.spoon_radius},
                    {"cup_radius", particles.cup_radius},
                    {"cup_height", particles.cup_height}};
  j["markers"] = {{"count", markers.count},
                  {"rows", markers.rows},
                  {"spacing", markers.spacing},
                  {"start", markers.start},
                  {"row_angle", markers.row_angle}};
  const RewardConfig& r = reward;
  j["reward"] = {{"distance_weight", r.distance_weight},
                 {"capture_bonus", r.capture_bonus},
                 {"spill_penalty", r.spill_penalty},
                 {"scratch_bonus", r.scratch_bonus},
                 {"wipe_bonus", r.wipe_bonus},
                 {"force_weight", r.force_weight},
                 {"force_cap", r.force_cap},
                 {"itch_force_cap", r.itch_force_cap},
                 {"near_itch_radius", r.near_itch_radius},
                 {"tilt_weight", r.tilt_weight},
                 {"tilt_gate", r.tilt_gate},
                 {"scratch_radius", r.scratch_radius},
                 {"scratch_min_tangential", r.scratch_min_tangential},
                 {"wipe_radius", r.wipe_radius},
                 {"wipe_max_angle", r.wipe_max_angle}};
  j["human"] = {{"sex", human.sex},
                {"wheelchair", pose_json(human.wheelchair)},
                {"bed", pose_json(human.bed)},
                {"head_randomization", human.head_randomization},
                {"arm_randomization", human.arm_randomization}};
  for (const auto& [t, tc] : tasks) j["tasks"][to_string(t)] = {{"tool_start", pose_json(tc.tool_start)}};
  for (const auto& [p, text] : robot_profiles) j["robots"][to_string(p)] = hash_hex(text);
  return j;
}

/// Overrides defaults with whatever the TOML table provides. Relative robot
/// profile paths resolve against `base_dir`.
inline EnvConfig env_config_from_toml(const toml::table& root, const std::filesystem::path& base_dir = {}) {
  using config_detail::read;
  const toml::node_view<const toml::node> v{root};
  const auto version = v["schema_version"].value<std::int64_t>();
  if (!version) throw ConfigError("env config missing schema_version");
  if (*version != kEnvSchemaVersion) {
    throw ConfigError("unsupported env config schema_version " + std::to_string(*version));
  }
  EnvConfig c;
  read(v["episode"], "steps", c.episode.steps);
  read(v["episode"], "dt", c.episode.dt);
  read(v["robot"], "delta_max", c.robot.delta_max);
  read(v["robot"], "contact_stiffness", c.robot.contact_stiffness);
  auto p = v["particles"];
  read(p, "food", c.particles.food);
  read(p, "water", c.particles.water);
  read(p, "mouth_capture_radius", c.particles.mouth_capture_radius);
  read(p, "spoon_release_angle_deg", c.particles.spoon_release_angle);
  if (p["spoon_release_angle_deg"]) c.particles.spoon_release_angle = deg(c.particles.spoon_release_angle);
  read(p, "cup_pour_angle_min_deg", c.particles.cup_pour_angle_min);
  if (p["cup_pour_angle_min_deg"]) c.particles.cup_pour_angle_min = deg(c.particles.cup_pour_angle_min);
  read(p, "cup_pour_angle_max_deg", c.particles.cup_pour_angle_max);
  if (p["cup_pour_angle_max_deg"]) c.particles.cup_pour_angle_max = deg(c.particles.cup_pour_angle_max);
  read(p, "spill_drop", c.particles.spill_drop);
  read(p, "gravity", c.particles.gravity);
  read(p, "spoon_radius", c.particles.spoon_radius);
  read(p, "cup_radius", c.particles.cup_radius);
  read(p, "cup_height", c.particles.cup_height);
  auto m = v["markers"];
  read(m, "count", c.markers.count);
  read(m, "rows", c.markers.rows);
  read(m, "spacing", c.markers.spacing);
  read(m, "start", c.markers.start);
  read(m, "row_angle", c.markers.row_angle);
  auto r = v["reward"];
  read(r, "distance_weight", c.reward.distance_weight);
  read(r, "capture_bonus", c.reward.capture_bonus);
  read(r, "spill_penalty", c.reward.spill_penalty);
  read(r, "scratch_bonus", c.reward.scratch_bonus);
  read(r, "wipe_bonus", c.reward.wipe_bonus);
  read(r, "force_weight", c.reward.force_weight);
  read(r, "force_cap", c.reward.force_cap);
  read(r, "itch_force_cap", c.reward.itch_force_cap);
  read(r, "near_itch_radius", c.reward.near_itch_radius);
  read(r, "tilt_weight", c.reward.tilt_weight);
  read(r, "tilt_gate", c.reward.tilt_gate);
  read(r, "scratch_radius", c.reward.scratch_radius);
  read(r, "scratch_min_tangential", c.reward.scratch_min_tangential);
  read(r, "wipe_radius", c.reward.wipe_radius);
  read(r, "wipe_max_angle_deg", c.reward.wipe_max_angle);
  if (r["wipe_max_angle_deg"]) c.reward.wipe_max_angle = deg(c.reward.wipe_max_angle);
  auto h = v["human"];
  read(h, "sex", c.human.sex);
  if (h["wheelchair"]) c.human.wheelchair = kin::pose_from_toml(h["wheelchair"], "human.wheelchair");
  if (h["bed"]) c.human.bed = kin::pose_from_toml(h["bed"], "human.bed");
  if (const toml::array* hr = h["head_randomization"].as_array()) {
    if (hr->size() != 3) throw ConfigError("human.head_randomization must have 3 values");
    for (std::size_t i = 0; i < 3; ++i) c.human.head_randomization[i] = (*hr)[i].value_or(0.0);
  }
  read(h, "arm_randomization", c.human.arm_randomization);
  for (Task t : kAllTasks) {
    const auto node = v["tasks"][to_string(t)]["tool_start"];
    if (node) c.tasks[t].tool_start = kin::pose_from_toml(node, std::string("tasks.") + to_string(t));
  }
  for (RobotProfile prof : kAllProfiles) {
    const auto path = v["robots"][to_string(prof)].value<std::string>();
    if (!path) continue;
    std::filesystem::path fp(*path);
    if (fp.is_relative()) fp = base_dir / fp;
    std::ifstream is(fp);
    if (!is) throw ConfigError("cannot open robot profile " + fp.string());
    c.robot_profiles[prof] = std::string(std::istreambuf_iterator<char>(is), {});
  }
  c.validate();
  return c;
}

inline EnvConfig load_env_config(const std::filesystem::path& path) {
  return env_config_from_toml(kin::parse_toml_file(path), path.parent_path());
}

inline const EnvConfig& default_env_config() {
  static const EnvConfig c = [] {
    EnvConfig d;
    d.validate();
    return d;
  }();
  return c;
}

}  // namespace avr::envs
