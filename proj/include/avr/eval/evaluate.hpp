#pragma once

#include <sstream>
#include <thread>

#include "avr/eval/metrics.hpp"
#include "avr/eval/record.hpp"
#include "avr/learn/train.hpp"

namespace avr::eval {

class ObsDimMismatch : public Error {
 public:
  ObsDimMismatch(std::size_t policy, std::size_t task)
      : Error("ObsDimMismatch", "policy expects " + std::to_string(policy) + " observation values, task provides " +
                                    std::to_string(task)) {}
};

/// Short stable id for a policy: hash of its serialized form.
inline std::string policy_id(const learn::PolicyNet& net) { return hash_hex(learn::policy_to_json(net).dump()); }

inline StepRow make_row(int t, const envs::Observation& obs, const robot::Action& a, const envs::Transition& tr) {
  StepRow row;
  row.t = t;
  row.obs.assign(obs.data(), obs.data() + obs.size());
  row.action = a.delta;
  row.reward = tr.reward;
  row.force = tr.force;
  row.events = tr.events;
  return row;
}

/// One deterministic (mean-action) episode against a static sampled human.
inline EpisodeRecord record_episode(envs::AssistEnv& env, const learn::PolicyNet& net, std::uint64_t seed,
                                    human::BiomechMode biomech, const std::string& id) {
  EpisodeRecord rec;
  rec.header = {env.config().hash(), seed, env.task(), env.profile(), id, biomech,
                envs::HumanSource::static_sampled, std::nullopt};
  Rng rng(seed);
  envs::Observation obs = env.reset(rng, biomech);
  while (!env.done()) {
    const learn::PolicyOutput out = learn::policy_forward(net, obs);
    const robot::Action a = learn::to_action(out.mean, env.config().robot.delta_max);
    const envs::Transition tr = env.step(a);
    rec.rows.push_back(make_row(env.state().t - 1, obs, a, tr));
    obs = tr.observation;
  }
  rec.footer.cumulative_reward = env.state().cumulative_reward;
  rec.footer.success = env.success();
  seal(rec);
  return rec;
}

struct EvaluationResult {
  MetricsRow metrics;
  std::vector<EpisodeRecord> records;
};

/// Episode i uses seed learn::eval_seed(seed, i); episodes are independent,
/// so the worker count and execution order do not affect the result.
inline EvaluationResult evaluate(const learn::PolicyNet& net, const envs::EnvConfig& cfg, Task task,
                                 RobotProfile profile, int episodes, std::uint64_t seed, human::BiomechMode biomech,
                                 int workers = 1, std::string id = {}) {
  if (static_cast<std::size_t>(net.obs_dim()) != envs::observation_size(task)) {
    throw ObsDimMismatch(static_cast<std::size_t>(net.obs_dim()), envs::observation_size(task));
  }
  if (episodes <= 0) throw ValidationError("episodes must be >= 1");
  if (id.empty()) id = policy_id(net);
  EvaluationResult res;
  res.records.resize(static_cast<std::size_t>(episodes));
  const int W = std::max(1, std::min(workers, episodes));
  auto work = [&](int w) {
    envs::AssistEnv env(cfg, task, profile);
    for (int e = w; e < episodes; e += W) {
      res.records[static_cast<std::size_t>(e)] = record_episode(env, net, learn::eval_seed(seed, e), biomech, id);
    }
  };
  std::vector<std::thread> threads;
  for (int w = 1; w < W; ++w) threads.emplace_back(work, w);
  work(0);
  for (auto& t : threads) t.join();

  MetricsRow& m = res.metrics;
  m.task = task;
  m.profile = profile;
  m.policy_id = id;
  m.condition = "simulation";
  m.policy_kind = biomech == human::BiomechMode::fixed ? "original" : "revised";
  m.episodes = episodes;
  double sum = 0.0;
  for (const EpisodeRecord& r : res.records) {
    sum += r.footer.cumulative_reward;
    m.successes += r.footer.success ? 1 : 0;
  }
  m.mean_reward = sum / episodes;
  return res;
}

struct ReplayReport {
  bool clean = true;
  int divergence_step = -1;  // -1: none, rows.size(): footer
  std::string field;
  std::string detail;
  bool digest_ok = true;
};

/// Re-simulates a record from its header and recorded actions and compares
/// every stored field exactly.
inline ReplayReport replay(const EpisodeRecord& rec, const envs::EnvConfig& cfg) {
  const std::string installed = cfg.hash();
  if (rec.header.config_hash != installed) throw ConfigHashMismatch(rec.header.config_hash, installed);
  if (static_cast<int>(rec.rows.size()) != cfg.episode.steps) {
    throw SchemaError("record has " + std::to_string(rec.rows.size()) + " rows, expected " +
                      std::to_string(cfg.episode.steps));
  }
  const bool live = rec.header.source == envs::HumanSource::live;
  if (live && !rec.header.initial_human) throw SchemaError("live record lacks the initial human");

  ReplayReport rep;
  auto diverge = [&](int step, const std::string& field, const std::string& detail) {
    if (!rep.clean) return;
    rep.clean = false;
    rep.divergence_step = step;
    rep.field = field;
    rep.detail = detail;
  };

  envs::AssistEnv env(cfg, rec.header.task, rec.header.profile);
  Rng rng(rec.header.seed);
  env.reset(rng, rec.header.biomech, rec.header.source, rec.header.initial_human);
  for (std::size_t i = 0; i < rec.rows.size() && rep.clean; ++i) {
    const StepRow& row = rec.rows[i];
    const int step = static_cast<int>(i);
    if (row.t != step) diverge(step, "t", "row index " + std::to_string(row.t));
    if (live) {
      if (!row.human_q) throw SchemaError("live record row " + std::to_string(i) + " lacks human_q");
      human::HumanState h = env.state().human;
      h.set_joints(*row.human_q);
      env.set_human(h);
    }
    const envs::Observation obs = envs::observe(env.state());
    if (row.obs.size() != static_cast<std::size_t>(obs.size())) {
      diverge(step, "obs", "length");
      break;
    }
    for (Eigen::Index k = 0; k < obs.size(); ++k) {
      if (row.obs[static_cast<std::size_t>(k)] != obs[k]) {
        diverge(step, "obs", "component " + std::to_string(k));
        break;
      }
    }
    if (!rep.clean) break;
    robot::Action a;
    a.delta = row.action;
    const envs::Transition tr = env.step(a);
    if (tr.reward != row.reward) {
      std::ostringstream os;
      os.precision(17);
      os << "recorded " << row.reward << " replayed " << tr.reward;
      diverge(step, "reward", os.str());
    } else if (tr.force != row.force) {
      diverge(step, "force", "");
    } else if (tr.events.captured != row.events.captured || tr.events.spilled != row.events.spilled ||
               tr.events.scratches != row.events.scratches || tr.events.wiped != row.events.wiped) {
      diverge(step, "events", "");
    }
  }
  const int footer_step = static_cast<int>(rec.rows.size());
  if (rep.clean) {
    if (env.state().cumulative_reward != rec.footer.cumulative_reward) {
      diverge(footer_step, "cumulative_reward", "");
    } else if (env.success() != rec.footer.success) {
      diverge(footer_step, "success", "");
    }
  }
  rep.digest_ok = compute_digest(rec) == rec.footer.digest;
  if (!rep.digest_ok) diverge(footer_step, "digest", "content digest does not match");
  return rep;
}

}  // namespace avr::eval
