#pragma once

// Live session state machine. Transport-agnostic: the network layer calls
// enqueue() as messages arrive and tick() on the 10 Hz clock; only tick()
// changes simulation state, so a session is a pure fold over its seed, the
// ordered inbound messages and the tick sequence.
//
// Wire protocol, version 1. Every message is a JSON object with "type" and
// "sid".
//   client -> server
//     hello         {version?}
//     start         {task, robot, policy, practice?: bool}
//     pose          {t, head, left, right}   each pose {p:[3], q:[x,y,z,w]}
//     questionnaire {L1, L2, L3, L4}         integers 1..7
//     stop          {}
//   server -> client
//     config  {version, tasks, robots, policies, steps, tick_hz, avatar}
//     state   {phase, practice, t, human_q[20], robot_q[7], tool, force,
//              particles:[{p, status}], markers:[bool], reward, cumulative}
//     result  {practice, trial_id, success, cumulative_reward, steps}
//              (state also carries input_age: ticks since the held pose
//              arrived)
//     error   {code, message}
//
// Phases only move forward: lobby -> practice -> trial -> questionnaire ->
// done. A practice episode may be restarted; practice may be skipped.

#include <nlohmann/json.hpp>

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "avr/eval/evaluate.hpp"
#include "avr/eval/questionnaire.hpp"
#include "avr/human/retarget.hpp"
#include "avr/human/tracked_input.hpp"

namespace avr::live {

inline constexpr int kProtocolVersion = 1;
inline constexpr int kTickHz = 10;

enum class Phase { lobby, practice, trial, questionnaire, done };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::lobby: return "lobby";
    case Phase::practice: return "practice";
    case Phase::trial: return "trial";
    case Phase::questionnaire: return "questionnaire";
    case Phase::done: return "done";
  }
  return "?";
}

class SessionExpired : public Error {
 public:
  SessionExpired() : Error("SessionExpired", "session is finished") {}
};

struct SessionOptions {
  envs::EnvConfig env = envs::default_env_config();
  std::map<std::string, std::shared_ptr<const learn::PolicyNet>> policies;
  std::filesystem::path record_dir;  // empty: keep records in memory only
  std::uint64_t seed = 1;
  bool stochastic = false;
};

/// Avatar placed in the task's furniture with default adult dimensions.
inline human::HumanState default_avatar(const envs::EnvConfig& cfg, Task task) {
  human::HumanState h;
  h.anthro = human::default_anthropometrics(human::Sex::male);
  h.body = cfg.body_pose(task);
  h.right_arm = human::neutral_arm(human::Side::right);
  h.left_arm = human::neutral_arm(human::Side::left);
  if (task == Task::bathing) {
    h.right_arm = {0.0, -0.2, 0.0, -0.1, 0.0, 0.0, 0.0};
    h.left_arm = {0.0, 0.2, 0.0, -0.1, 0.0, 0.0, 0.0};
  }
  return h;
}

class Session {
 public:
  Session(std::string id, std::shared_ptr<const SessionOptions> opts) : id_(std::move(id)), opts_(std::move(opts)) {}

  const std::string& id() const { return id_; }
  Phase phase() const { return phase_; }
  bool running() const { return env_ && !env_->done() && (phase_ == Phase::practice || phase_ == Phase::trial); }
  int ticks() const { return ticks_; }
  const std::vector<eval::EpisodeRecord>& records() const { return records_; }
  const std::vector<eval::QuestionnaireRecord>& questionnaires() const { return questionnaires_; }
  const envs::AssistEnv* env() const { return env_.get(); }
  std::size_t pending() const { return inbox_.size(); }
  int rejected_poses() const { return rejected_poses_; }

  /// Network side: raw text in arrival order. Parsing errors surface at the
  /// next tick like any other message.
  void enqueue(std::string text) { inbox_.push_back(std::move(text)); }

  /// Applies queued messages, then advances the simulation one step if a
  /// practice or trial episode is running. Returns the outbound messages.
  std::vector<nlohmann::json> tick() {
    if (phase_ == Phase::done) throw SessionExpired();
    std::vector<nlohmann::json> out;
    while (!inbox_.empty()) {
      std::string text = std::move(inbox_.front());
      inbox_.pop_front();
      apply(text, out);
    }
    ++ticks_;
    ++input_age_;
    if (running()) step(out);
    return out;
  }

 private:
  nlohmann::json base(const char* type) const { return {{"type", type}, {"sid", id_}}; }

  void error(std::vector<nlohmann::json>& out, const std::string& code, const std::string& message) const {
    nlohmann::json e = base("error");
    e["code"] = code;
    e["message"] = message;
    out.push_back(std::move(e));
  }

  void apply(const std::string& text, std::vector<nlohmann::json>& out) {
    nlohmann::json msg;
    try {
      msg = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      error(out, "BadSchema", std::string("invalid JSON: ") + e.what());
      return;
    }
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string() || !msg.contains("sid") ||
        !msg["sid"].is_string()) {
      error(out, "BadSchema", "message needs string 'type' and 'sid'");
      return;
    }
    if (msg["sid"].get<std::string>() != id_) {
      error(out, "BadSchema", "sid does not match this session");
      return;
    }
    const std::string type = msg["type"].get<std::string>();
    try {
      if (type == "hello") {
        on_hello(out);
      } else if (type == "start") {
        on_start(msg, out);
      } else if (type == "pose") {
        on_pose(msg, out);
      } else if (type == "questionnaire") {
        on_questionnaire(msg, out);
      } else if (type == "stop") {
        on_stop(out);
      } else {
        error(out, "BadSchema", "unknown message type '" + type + "'");
      }
    } catch (const SchemaError& e) {
      error(out, "BadSchema", e.what());
    } catch (const Error& e) {
      error(out, e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
      error(out, "BadSchema", e.what());
    }
  }

  void on_hello(std::vector<nlohmann::json>& out) const {
    nlohmann::json c = base("config");
    c["version"] = kProtocolVersion;
    c["tasks"] = nlohmann::json::array();
    for (Task t : kAllTasks) c["tasks"].push_back(to_string(t));
    c["robots"] = nlohmann::json::array();
    for (RobotProfile p : kAllProfiles) c["robots"].push_back(to_string(p));
    c["policies"] = nlohmann::json::array();
    for (const auto& [name, net] : opts_->policies) {
      c["policies"].push_back({{"id", name}, {"task", to_string(net->task)}});
    }
    c["steps"] = opts_->env.episode.steps;
    c["tick_hz"] = kTickHz;
    c["phase"] = to_string(phase_);
    nlohmann::json avatar;
    for (Task t : kAllTasks) avatar[to_string(t)] = envs::human_to_json(default_avatar(opts_->env, t));
    c["avatar"] = avatar;
    out.push_back(std::move(c));
  }

  void on_start(const nlohmann::json& msg, std::vector<nlohmann::json>& out) {
    const bool practice = msg.value("practice", false);
    if (phase_ == Phase::questionnaire || phase_ == Phase::done || phase_ == Phase::trial ||
        (practice && phase_ != Phase::lobby && phase_ != Phase::practice)) {
      error(out, "OutOfPhase", std::string("cannot start in phase ") + to_string(phase_));
      return;
    }
    if (phase_ == Phase::practice && running()) {
      error(out, "OutOfPhase", "a practice episode is still running");
      return;
    }
    const Task task = task_from_string(msg.at("task").get<std::string>());
    const RobotProfile profile = profile_from_string(msg.at("robot").get<std::string>());
    const std::string policy = msg.at("policy").get<std::string>();
    const auto it = opts_->policies.find(policy);
    if (it == opts_->policies.end()) {
      error(out, "UnknownPolicy", "unknown policy '" + policy + "'");
      return;
    }
    if (static_cast<std::size_t>(it->second->obs_dim()) != envs::observation_size(task)) {
      error(out, "ObsDimMismatch", "policy '" + policy + "' does not fit task " + to_string(task));
      return;
    }
    policy_ = it->second;
    policy_id_ = policy;
    env_ = std::make_unique<envs::AssistEnv>(opts_->env, task, profile);
    ++episode_counter_;
    episode_seed_ = derive_seed({opts_->seed, fnv1a64(id_), static_cast<std::uint64_t>(episode_counter_)});
    rng_ = Rng(episode_seed_);
    const human::HumanState avatar = default_avatar(opts_->env, task);
    env_->reset(rng_, human::BiomechMode::fixed, envs::HumanSource::live, avatar);
    practice_ = practice;
    phase_ = practice ? Phase::practice : Phase::trial;
    latest_.reset();
    last_input_t_.reset();
    record_ = eval::EpisodeRecord{};
    record_.header = {opts_->env.hash(), episode_seed_, task, profile, policy_id_, human::BiomechMode::fixed,
                      envs::HumanSource::live, avatar};
  }

  void on_pose(const nlohmann::json& msg, std::vector<nlohmann::json>& out) {
    if (phase_ == Phase::questionnaire || phase_ == Phase::done) {
      error(out, "OutOfPhase", std::string("pose not accepted in phase ") + to_string(phase_));
      return;
    }
    const human::TrackedInput in = human::tracked_input_from_json(msg);
    if (last_input_t_ && !(in.t > *last_input_t_)) {
      ++rejected_poses_;
      error(out, "NonMonotoneTimestamp", "pose timestamp must increase; prior input kept");
      return;
    }
    last_input_t_ = in.t;
    latest_ = in;
    input_age_ = 0;
  }

  void on_questionnaire(const nlohmann::json& msg, std::vector<nlohmann::json>& out) {
    if (phase_ != Phase::questionnaire) {
      error(out, "OutOfPhase", std::string("questionnaire not accepted in phase ") + to_string(phase_));
      return;
    }
    eval::QuestionnaireRecord q;
    q.session_id = id_;
    q.trial_id = trial_id();
    q.responses = eval::likert_from_json(msg);
    q.validate();
    if (!opts_->record_dir.empty()) eval::append_questionnaire(q, opts_->record_dir / "questionnaires.jsonl");
    questionnaires_.push_back(q);
    phase_ = Phase::done;
  }

  void on_stop(std::vector<nlohmann::json>& out) {
    if (phase_ == Phase::done) {
      error(out, "OutOfPhase", "session already finished");
      return;
    }
    // An unfinished episode has fewer rows than a valid record and is dropped.
    env_.reset();
    phase_ = Phase::done;
  }

  std::string trial_id() const { return id_ + "-trial"; }

  void step(std::vector<nlohmann::json>& out) {
    envs::AssistEnv& env = *env_;
    if (latest_) {
      const human::RetargetResult r = human::retarget_frame(env.state().human, *latest_);
      env.set_human(r.state);
    }
    const envs::Observation obs = envs::observe(env.state());
    const learn::PolicyOutput po = learn::policy_forward(*policy_, obs);
    Eigen::VectorXd u = po.mean;
    if (opts_->stochastic) {
      for (Eigen::Index i = 0; i < u.size(); ++i) u[i] += std::exp(po.log_std[i]) * standard_normal(rng_);
    }
    const robot::Action a = learn::to_action(u, env.config().robot.delta_max);
    const std::array<double, human::kHumanDof> human_q = env.state().human.joints();
    const envs::Transition tr = env.step(a);
    eval::StepRow row = eval::make_row(env.state().t - 1, obs, a, tr);
    row.human_q = human_q;
    record_.rows.push_back(std::move(row));
    out.push_back(state_message(tr));
    if (env.done()) finish(out);
  }

  nlohmann::json state_message(const envs::Transition& tr) const {
    const envs::EnvState& s = env_->state();
    nlohmann::json m = base("state");
    m["phase"] = to_string(phase_);
    m["practice"] = practice_;
    m["t"] = s.t;
    m["human_q"] = s.human.joints();
    m["robot_q"] = std::vector<double>(s.robot.q.data(), s.robot.q.data() + s.robot.q.size());
    m["tool"] = human::pose_to_json(s.tool);
    m["force"] = s.force;
    m["particles"] = nlohmann::json::array();
    for (const envs::Particle& p : s.particles) {
      m["particles"].push_back({{"p", {p.position.x(), p.position.y(), p.position.z()}}, {"status", to_string(p.status)}});
    }
    m["markers"] = nlohmann::json::array();
    for (const envs::Marker& mk : s.markers) m["markers"].push_back(mk.wiped);
    m["reward"] = tr.reward;
    m["cumulative"] = s.cumulative_reward;
    // Ticks since the pose being held arrived; -1 before any input. Logged
    // for latency analysis, never compensated.
    m["input_age"] = latest_ ? input_age_ - 1 : -1;
    return m;
  }

  void finish(std::vector<nlohmann::json>& out) {
    const bool ok = env_->success();
    nlohmann::json r = base("result");
    r["practice"] = practice_;
    r["success"] = ok;
    r["cumulative_reward"] = env_->state().cumulative_reward;
    r["steps"] = env_->state().t;
    if (!practice_) {
      record_.footer.cumulative_reward = env_->state().cumulative_reward;
      record_.footer.success = ok;
      eval::seal(record_);
      if (!opts_->record_dir.empty()) eval::save_record(record_, opts_->record_dir / (trial_id() + ".jsonl"));
      records_.push_back(record_);
      r["trial_id"] = trial_id();
      phase_ = Phase::questionnaire;
    }
    out.push_back(std::move(r));
  }

  std::string id_;
  std::shared_ptr<const SessionOptions> opts_;
  Phase phase_ = Phase::lobby;
  bool practice_ = false;
  std::deque<std::string> inbox_;
  std::unique_ptr<envs::AssistEnv> env_;
  std::shared_ptr<const learn::PolicyNet> policy_;
  std::string policy_id_;
  Rng rng_;
  std::uint64_t episode_seed_ = 0;
  int episode_counter_ = 0;
  std::optional<human::TrackedInput> latest_;
  std::optional<double> last_input_t_;
  eval::EpisodeRecord record_;
  std::vector<eval::EpisodeRecord> records_;
  std::vector<eval::QuestionnaireRecord> questionnaires_;
  int ticks_ = 0;
  int rejected_poses_ = 0;
  int input_age_ = 0;
};

/// Loads every *.json policy in `dir`; the id is the file stem.
inline std::map<std::string, std::shared_ptr<const learn::PolicyNet>> load_policy_dir(const std::filesystem::path& dir) {
  std::map<std::string, std::shared_ptr<const learn::PolicyNet>> out;
  if (dir.empty()) return out;
  if (!std::filesystem::is_directory(dir)) throw ConfigError("policy directory not found: " + dir.string());
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    out[e.path().stem().string()] = std::make_shared<const learn::PolicyNet>(learn::load_policy(e.path()));
  }
  return out;
}

}  // namespace avr::live
