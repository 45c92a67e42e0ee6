#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

#include "avr/core/rng.hpp"
#include "avr/envs/config.hpp"
#include "avr/envs/particles.hpp"
#include "avr/envs/surface.hpp"
#include "avr/human/biomechanics.hpp"
#include "avr/kinematics/ik_dls.hpp"

namespace avr::envs {

class EpisodeFinished : public Error {
 public:
  EpisodeFinished() : Error("EpisodeFinished", "step called after the final timestep") {}
};

class EpisodeNotFinished : public Error {
 public:
  EpisodeNotFinished() : Error("EpisodeNotFinished", "success queried before the episode ended") {}
};

enum class HumanSource { static_sampled, live };

struct Marker {
  SurfaceAnchor anchor;
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  bool wiped = false;
};

struct EnvState {
  Task task = Task::feeding;
  human::BiomechMode biomech = human::BiomechMode::fixed;
  HumanSource source = HumanSource::static_sampled;
  human::HumanState human;
  robot::RobotState robot;
  Pose6 tool;                         // tool pose after the last step
  Vec3 prev_tool = Vec3::Zero();      // tool position before the last step
  double force = 0.0;                 // contact force magnitude, N
  std::vector<Particle> particles;
  std::vector<Marker> markers;
  SurfaceAnchor itch_anchor;
  SurfacePoint itch;
  int scratch_count = 0;
  int t = 0;
  double cumulative_reward = 0.0;

  human::BodyGeometry geometry;  // derived from `human`

  int wiped_count() const {
    int n = 0;
    for (const Marker& m : markers) n += m.wiped ? 1 : 0;
    return n;
  }
};

struct StepEvents {
  int captured = 0;
  int spilled = 0;
  int scratches = 0;
  int wiped = 0;
};

using Observation = Eigen::VectorXd;

struct Transition {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  double force = 0.0;
  StepEvents events;
};

inline constexpr std::size_t kBaseObservationSize = 7 + 3 + 4 + 1;

inline std::size_t observation_size(Task task) {
  return task == Task::feeding || task == Task::drinking ? kBaseObservationSize + 6 : kBaseObservationSize + 12;
}

/// Recomputes avatar geometry and the arm-anchored markers and itch.
inline void refresh_human(EnvState& s) {
  s.geometry = human::body_geometry(s.human);
  const human::ArmGeometry& arm = s.geometry.arm(human::Side::right);
  for (Marker& m : s.markers) {
    const SurfacePoint p = resolve(m.anchor, s.human.anthro, arm);
    m.position = p.position;
    m.normal = p.normal;
  }
  if (s.task == Task::scratching) s.itch = resolve(s.itch_anchor, s.human.anthro, arm);
}

/// Point the distance-shaping term pulls the tool toward.
inline Vec3 task_target(const EnvState& s) {
  switch (s.task) {
    case Task::feeding:
    case Task::drinking: return s.geometry.mouth;
    case Task::scratching: return s.itch.position;
    case Task::bathing: {
      const Marker* best = nullptr;
      double bd = 0.0;
      for (const Marker& m : s.markers) {
        if (m.wiped) continue;
        const double d = (m.position - s.tool.position).squaredNorm();
        if (!best || d < bd) {
          best = &m;
          bd = d;
        }
      }
      return best ? best->position : s.tool.position;
    }
  }
  return s.tool.position;
}

inline Observation observe(const EnvState& s) {
  Observation o(static_cast<Eigen::Index>(observation_size(s.task)));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < s.robot.q.size(); ++i) o[k++] = s.robot.q[i];
  for (int i = 0; i < 3; ++i) o[k++] = s.tool.position[i];
  Quat q = s.tool.orientation;
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  o[k++] = q.x();
  o[k++] = q.y();
  o[k++] = q.z();
  o[k++] = q.w();
  o[k++] = s.force;
  if (s.task == Task::feeding || s.task == Task::drinking) {
    const Vec3 rpy = rpy_from_quat(s.geometry.head.orientation);
    for (int i = 0; i < 3; ++i) o[k++] = s.geometry.head.position[i];
    for (int i = 0; i < 3; ++i) o[k++] = rpy[i];
  } else {
    const human::ArmGeometry& arm = s.geometry.arm(human::Side::right);
    for (const Vec3* p : {&arm.shoulder, &arm.elbow, &arm.wrist}) {
      for (int i = 0; i < 3; ++i) o[k++] = (*p)[i];
    }
    const Vec3 target = task_target(s);
    for (int i = 0; i < 3; ++i) o[k++] = target[i];
  }
  return o;
}

/// Cup tilt credit in [0, 1], reaching 1 at the last particle's pour angle.
inline double tilt_alignment(const Pose6& tool, const ParticleConfig& c) {
  return std::clamp(tilt_angle(tool) / c.cup_pour_angle_max, 0.0, 1.0);
}

inline double force_cap(const EnvState& s, const RewardConfig& r) {
  if (s.task == Task::scratching && (s.tool.position - s.itch.position).norm() <= r.near_itch_radius) {
    return r.itch_force_cap;
  }
  return r.force_cap;
}

/// Reward for the transition prev -> next; event terms are count differences.
inline double reward(const EnvState& prev, const EnvState& next, const EnvConfig& cfg) {
  const RewardConfig& r = cfg.reward;
  double out = -r.distance_weight * (next.tool.position - task_target(next)).norm();
  const ParticleCounts pc = count(prev.particles);
  const ParticleCounts nc = count(next.particles);
  switch (next.task) {
    case Task::feeding:
    case Task::drinking:
      out += r.capture_bonus * (nc.captured - pc.captured);
      out -= r.spill_penalty * (nc.spilled - pc.spilled);
      if (next.task == Task::drinking && (next.tool.position - next.geometry.mouth).norm() <= r.tilt_gate) {
        out += r.tilt_weight * tilt_alignment(next.tool, cfg.particles);
      }
      break;
    case Task::scratching: out += r.scratch_bonus * (next.scratch_count - prev.scratch_count); break;
    case Task::bathing: out += r.wipe_bonus * (next.wiped_count() - prev.wiped_count()); break;
  }
  out -= r.force_weight * std::max(0.0, next.force - force_cap(next, r));
  return out;
}

/// Upper bound on |reward| for one step.
inline double reward_bound(const EnvConfig& cfg, Task task) {
  const RewardConfig& r = cfg.reward;
  constexpr double kMaxDistance = 5.0;
  constexpr double kMaxPenetration = 0.2;
  double events = 0.0;
  switch (task) {
    case Task::feeding:
      events = (r.capture_bonus + r.spill_penalty) * cfg.particles.food;
      break;
    case Task::drinking:
      events = (r.capture_bonus + r.spill_penalty) * cfg.particles.water + r.tilt_weight;
      break;
    case Task::scratching: events = r.scratch_bonus; break;
    case Task::bathing: events = r.wipe_bonus * cfg.markers.count; break;
  }
  return r.distance_weight * kMaxDistance + events +
         r.force_weight * cfg.robot.contact_stiffness * kMaxPenetration;
}

inline bool success(const EnvState& s, const EnvConfig& cfg) {
  if (s.t < cfg.episode.steps) throw EpisodeNotFinished();
  switch (s.task) {
    case Task::feeding:
    case Task::drinking: {
      const ParticleCounts c = count(s.particles);
      return 4 * c.captured >= 3 * c.total();
    }
    case Task::scratching: return s.scratch_count >= 25;
    case Task::bathing: return 10 * s.wiped_count() >= 3 * static_cast<int>(s.markers.size());
  }
  return false;
}

/// Robot joints placing the tool at the task's start pose. Deterministic
/// restarts from a fixed seed when the neutral seed does not converge.
inline kin::JointVector start_configuration(const robot::RobotModel& model, Task task, const Pose6& tool_start) {
  const kin::JointChain chain =
      model.chain.with_base(model.base(task)).with_ee_offset(model.chain.ee_offset() * model.tool_offset(robot::tool_for(task)));
  kin::IkParams ik;
  ik.max_iterations = 200;
  Rng rng(derive_seed({0x5747u, static_cast<std::uint64_t>(task)}));
  kin::IkResult best;
  double best_score = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 64; ++k) {
    kin::JointVector q0 = model.neutral_q;
    if (k > 0) {
      for (std::size_t i = 0; i < chain.size(); ++i) {
        q0[static_cast<Eigen::Index>(i)] =
            uniform(rng, std::max(-kPi, chain.link(i).lower), std::min(kPi, chain.link(i).upper));
      }
    }
    const kin::IkResult r = kin::ik_dls(chain, q0, tool_start, ik);
    if (r.converged) return r.q;
    const double score = r.position_residual + 0.1 * r.orientation_residual;
    if (score < best_score) {
      best_score = score;
      best = r;
    }
  }
  return best.q;
}

class AssistEnv {
 public:
  AssistEnv(EnvConfig config, Task task, RobotProfile profile)
      : config_(std::move(config)), task_(task), profile_(profile) {
    config_.validate();
    const robot::RobotModel& model = config_.robot_model(profile_);
    start_q_ = start_configuration(model, task_, config_.tasks.at(task_).tool_start);
  }

  const EnvConfig& config() const { return config_; }
  Task task() const { return task_; }
  RobotProfile profile() const { return profile_; }
  std::size_t observation_size() const { return envs::observation_size(task_); }
  const kin::JointVector& start_q() const { return start_q_; }
  const EnvState& state() const { return state_; }
  bool done() const { return state_.t >= config_.episode.steps; }
  bool success() const { return envs::success(state_, config_); }

  /// Static humans are sampled from `rng`. A live reset takes the avatar as
  /// given; everything else is still drawn from `rng`.
  Observation reset(Rng& rng, human::BiomechMode mode, HumanSource source = HumanSource::static_sampled,
                    const std::optional<human::HumanState>& live_human = std::nullopt) {
    EnvState s;
    s.task = task_;
    s.biomech = mode;
    s.source = source;
    if (source == HumanSource::live) {
      if (!live_human) throw ValidationError("live reset requires a human state");
      s.human = *live_human;
    } else {
      s.human = sample_static_human(rng, mode);
    }
    const robot::RobotModel& model = config_.robot_model(profile_);
    s.robot = robot::make_robot_state(model, profile_, task_, start_q_);
    s.tool = robot::tool_pose(s.robot);
    s.prev_tool = s.tool.position;
    s.geometry = human::body_geometry(s.human);

    const human::ArmGeometry& arm = s.geometry.arm(human::Side::right);
    const MarkerConfig& mc = config_.markers;
    if (task_ == Task::bathing) {
      for (const SurfaceAnchor& a : marker_anchors(s.human.anthro, arm, mc.count, mc.rows, mc.spacing, mc.start,
                                                   mc.row_angle)) {
        s.markers.push_back({a, Vec3::Zero(), Vec3::UnitZ(), false});
      }
    }
    if (task_ == Task::scratching) s.itch_anchor = sample_surface_anchor(rng, s.human.anthro);
    if (task_ == Task::feeding) s.particles = spoon_particles(config_.particles, s.tool);
    if (task_ == Task::drinking) s.particles = cup_particles(config_.particles, s.tool);
    refresh_human(s);
    s.force = robot::contact_force(s.tool.position, s.geometry.capsules, config_.robot.contact_stiffness).magnitude;
    state_ = std::move(s);
    return observe(state_);
  }

  /// Replaces the avatar pose (live sessions). Applies from the next step.
  void set_human(const human::HumanState& h) {
    state_.human = h;
    refresh_human(state_);
  }

  Transition step(const robot::Action& a) {
    if (done()) throw EpisodeFinished();
    const EnvState prev = state_;
    EnvState& s = state_;
    s.robot = robot::apply_action(s.robot, a, config_.robot.delta_max);
    s.prev_tool = s.tool.position;
    s.tool = robot::tool_pose(s.robot);

    Transition tr;
    if (task_ == Task::feeding || task_ == Task::drinking) {
      const ParticleEvents ev =
          step_particles(s.particles, s.tool, s.geometry.mouth, config_.particles, config_.episode.dt,
                         task_ == Task::feeding ? Utensil::spoon : Utensil::cup);
      tr.events.captured = ev.captured;
      tr.events.spilled = ev.spilled;
    }
    const RewardConfig& rc = config_.reward;
    if (task_ == Task::scratching) {
      const Vec3 disp = s.tool.position - s.prev_tool;
      const Vec3 tangential = disp - disp.dot(s.itch.normal) * s.itch.normal;
      if ((s.tool.position - s.itch.position).norm() <= rc.scratch_radius &&
          tangential.norm() >= rc.scratch_min_tangential) {
        ++s.scratch_count;
        tr.events.scratches = 1;
      }
    }
    if (task_ == Task::bathing) {
      const Vec3 face = -s.tool.rotation().col(2);
      const double cos_max = std::cos(rc.wipe_max_angle);
      for (Marker& m : s.markers) {
        if (m.wiped) continue;
        if ((s.tool.position - m.position).norm() <= rc.wipe_radius && face.dot(-m.normal) >= cos_max) {
          m.wiped = true;
          ++tr.events.wiped;
        }
      }
    }
    s.force = robot::contact_force(s.tool.position, s.geometry.capsules, config_.robot.contact_stiffness).magnitude;
    ++s.t;
    tr.reward = reward(prev, s, config_);
    s.cumulative_reward += tr.reward;
    tr.force = s.force;
    tr.done = done();
    tr.observation = observe(s);
    return tr;
  }

  human::HumanState sample_static_human(Rng& rng, human::BiomechMode mode) const {
    const HumanConfig& hc = config_.human;
    human::Sex sex = human::Sex::male;
    if (hc.sex == "female") {
      sex = human::Sex::female;
    } else if (hc.sex == "random") {
      sex = uniform(rng, 0.0, 1.0) < 0.5 ? human::Sex::male : human::Sex::female;
    }
    const human::BiomechSample b = human::sample_biomechanics(rng, sex, mode);
    human::HumanState h;
    h.anthro = b.anthro;
    h.body = config_.body_pose(task_);
    h.waist = b.waist;
    h.right_arm = human::neutral_arm(human::Side::right);
    h.left_arm = human::neutral_arm(human::Side::left);
    const human::HumanLimits& lim = human::human_limits();
    if (task_ == Task::feeding || task_ == Task::drinking) {
      for (std::size_t i = 0; i < 3; ++i) {
        const double r = hc.head_randomization[i];
        h.head[i] = lim.head[i].clamp(uniform(rng, -r, r));
      }
    } else {
      if (task_ == Task::bathing) {
        h.right_arm = {0.0, -0.2, 0.0, -0.1, 0.0, 0.0, 0.0};
        h.left_arm = {0.0, 0.2, 0.0, -0.1, 0.0, 0.0, 0.0};
      }
      const auto rl = lim.arm(human::Side::right);
      for (std::size_t i = 0; i < human::kArmDof; ++i) {
        h.right_arm[i] = rl[i].clamp(h.right_arm[i] + uniform(rng, -hc.arm_randomization, hc.arm_randomization));
      }
    }
    return h;
  }

  /// Restores a previously serialized state (replay and tests).
  void restore(EnvState s) {
    if (s.task != task_) throw ValidationError("restore: task mismatch");
    refresh_human(s);
    state_ = std::move(s);
  }

 private:
  EnvConfig config_;
  Task task_;
  RobotProfile profile_;
  kin::JointVector start_q_;
  EnvState state_;
};

}  // namespace avr::envs
