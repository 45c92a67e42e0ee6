#pragma once

#include <filesystem>
#include <functional>
#include <thread>
#include <vector>

#include "avr/envs/env.hpp"
#include "avr/learn/ppo.hpp"

namespace avr::learn {

struct TrainConfig {
  Task task = Task::feeding;
  RobotProfile profile = RobotProfile::armA;
  human::BiomechMode biomech = human::BiomechMode::fixed;
  int rollouts_per_iteration = 10;
  int total_rollouts = 500;
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  int epochs = 4;
  std::size_t minibatch = 512;
  double learning_rate = 3e-4;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  double init_log_std = 0.0;
  std::uint64_t seed = 1;
  int workers = 1;
  std::filesystem::path checkpoint_dir;  // empty: no checkpoints
  int checkpoint_every = 10;             // iterations

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0) || !(lambda > 0.0 && lambda <= 1.0)) {
      throw ConfigError("gamma and lambda must lie in (0, 1]");
    }
    if (!(clip > 0.0)) throw ConfigError("clip epsilon must be > 0");
    if (rollouts_per_iteration <= 0 || total_rollouts < 0) throw ConfigError("rollout counts invalid");
    if (epochs <= 0 || minibatch == 0 || !(learning_rate > 0.0)) throw ConfigError("optimizer settings invalid");
    if (workers <= 0) throw ConfigError("workers must be >= 1");
  }

  /// Covers everything that affects the result; worker count included.
  nlohmann::json to_json() const {
    return {{"task", to_string(task)},
            {"profile", to_string(profile)},
            {"biomech", human::to_string(biomech)},
            {"rollouts_per_iteration", rollouts_per_iteration},
            {"total_rollouts", total_rollouts},
            {"gamma", gamma},
            {"lambda", lambda},
            {"clip", clip},
            {"epochs", epochs},
            {"minibatch", minibatch},
            {"learning_rate", learning_rate},
            {"value_coef", value_coef},
            {"entropy_coef", entropy_coef},
            {"max_grad_norm", max_grad_norm},
            {"init_log_std", init_log_std},
            {"seed", seed},
            {"workers", workers}};
  }
  std::string hash() const { return hash_hex(to_json().dump()); }
};

/// Maps a policy output (normalized units) to joint increments.
inline robot::Action to_action(const Vector& u, double delta_max) {
  robot::Action a;
  for (std::size_t i = 0; i < robot::kRobotDof; ++i) {
    const double v = i < static_cast<std::size_t>(u.size()) ? u[static_cast<Eigen::Index>(i)] : 0.0;
    a.delta[i] = delta_max * std::clamp(std::isfinite(v) ? v : 0.0, -1.0, 1.0);
  }
  return a;
}

enum class ActionMode { stochastic, deterministic };

struct EpisodeData {
  Matrix raw_obs;   // obs_dim x T
  Matrix obs;       // normalized with the policy's stats at collection time
  Matrix actions;   // act_dim x T
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<bool> dones;
  double total_reward = 0.0;
  bool success = false;
};

inline EpisodeData run_episode(envs::AssistEnv& env, const PolicyNet& net, Rng& rng, human::BiomechMode biomech,
                               ActionMode mode) {
  const int T = env.config().episode.steps;
  const int D = net.obs_dim();
  const int A = net.act_dim();
  if (static_cast<std::size_t>(D) != env.observation_size()) {
    throw DimensionMismatch(env.observation_size(), static_cast<std::size_t>(D));
  }
  EpisodeData ep;
  ep.raw_obs.resize(D, T);
  ep.obs.resize(D, T);
  ep.actions.resize(A, T);
  Vector obs = env.reset(rng, biomech);
  const Vector log_std = net.log_std();
  const Vector std_dev = log_std.array().exp();
  for (int t = 0; t < T; ++t) {
    const Vector x = net.norm.apply(obs);
    const Vector mean = mlp_forward(net.actor, net.actor_params(), x).output().col(0);
    const double value = mlp_forward(net.critic, net.critic_params(), x).output()(0, 0);
    Vector u = mean;
    if (mode == ActionMode::stochastic) {
      for (int i = 0; i < A; ++i) u[i] += std_dev[i] * standard_normal(rng);
    }
    ep.raw_obs.col(t) = obs;
    ep.obs.col(t) = x;
    ep.actions.col(t) = u;
    ep.log_probs.push_back(gaussian_log_prob(u, mean, log_std));
    ep.values.push_back(value);
    const envs::Transition tr = env.step(to_action(u, env.config().robot.delta_max));
    ep.rewards.push_back(tr.reward);
    ep.dones.push_back(tr.done);
    ep.total_reward += tr.reward;
    obs = tr.observation;
  }
  ep.success = env.success();
  return ep;
}

/// Runs `count` episodes across `workers` threads. Episode e always uses
/// rng seed `seed_for(e)`, so results are independent of the worker count.
inline std::vector<EpisodeData> run_episodes(const envs::EnvConfig& cfg, Task task, RobotProfile profile,
                                             const PolicyNet& net, int count, int workers,
                                             const std::function<std::uint64_t(int)>& seed_for,
                                             human::BiomechMode biomech, ActionMode mode) {
  std::vector<EpisodeData> out(static_cast<std::size_t>(count));
  const int W = std::max(1, std::min(workers, count));
  auto work = [&](int w) {
    envs::AssistEnv env(cfg, task, profile);
    for (int e = w; e < count; e += W) {
      Rng rng(seed_for(e));
      out[static_cast<std::size_t>(e)] = run_episode(env, net, rng, biomech, mode);
    }
  };
  if (W == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(W));
    for (int w = 0; w < W; ++w) {
      threads.emplace_back([&, w] {
        try {
          work(w);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

struct IterationStats {
  int iteration = 0;
  int rollouts = 0;
  double mean_reward = 0.0;
  double success_rate = 0.0;
  LossStats loss;
};

inline nlohmann::json to_json(const IterationStats& s) {
  return {{"iteration", s.iteration},
          {"rollouts", s.rollouts},
          {"mean_reward", s.mean_reward},
          {"success_rate", s.success_rate},
          {"actor_loss", s.loss.actor},
          {"value_loss", s.loss.value},
          {"entropy", s.loss.entropy},
          {"approx_kl", s.loss.approx_kl},
          {"clip_fraction", s.loss.clip_fraction}};
}

struct TrainResult {
  PolicyNet net;
  std::vector<IterationStats> curve;
};

inline PolicyNet initial_policy(const TrainConfig& tc, std::size_t obs_dim) {
  Rng init_rng(derive_seed({tc.seed, 0x1D17u}));
  PolicyNet net = make_policy(static_cast<int>(obs_dim), static_cast<int>(robot::kRobotDof), init_rng, tc.init_log_std);
  net.task = tc.task;
  net.train_config_hash = tc.hash();
  return net;
}

inline RolloutBatch make_batch(const std::vector<EpisodeData>& eps, const TrainConfig& tc) {
  RolloutBatch b;
  std::size_t n = 0;
  for (const auto& e : eps) n += e.rewards.size();
  if (n == 0) return b;
  b.obs.resize(eps.front().obs.rows(), static_cast<Eigen::Index>(n));
  b.actions.resize(eps.front().actions.rows(), static_cast<Eigen::Index>(n));
  Eigen::Index col = 0;
  for (const auto& e : eps) {
    const auto T = static_cast<Eigen::Index>(e.rewards.size());
    b.obs.middleCols(col, T) = e.obs;
    b.actions.middleCols(col, T) = e.actions;
    col += T;
    b.log_probs.insert(b.log_probs.end(), e.log_probs.begin(), e.log_probs.end());
    b.rewards.insert(b.rewards.end(), e.rewards.begin(), e.rewards.end());
    b.dones.insert(b.dones.end(), e.dones.begin(), e.dones.end());
    b.values.insert(b.values.end(), e.values.begin(), e.values.end());
    std::vector<double> v = e.values;
    v.push_back(0.0);
    const GaeResult g = gae(e.rewards, v, e.dones, tc.gamma, tc.lambda);
    b.advantages.insert(b.advantages.end(), g.advantages.begin(), g.advantages.end());
    b.returns.insert(b.returns.end(), g.returns.begin(), g.returns.end());
  }
  return b;
}

/// PPO over static sampled humans. `on_iteration` (optional) sees each
/// iteration's stats as they are produced.
inline TrainResult train(const TrainConfig& tc, const envs::EnvConfig& env_cfg,
                         const std::function<void(const IterationStats&, const PolicyNet&)>& on_iteration = {}) {
  tc.validate();
  env_cfg.validate();
  TrainResult res;
  res.net = initial_policy(tc, envs::observation_size(tc.task));
  Adam opt(res.net.theta.size(), tc.learning_rate);
  const PpoConfig pc{tc.clip, tc.epochs, tc.minibatch, tc.value_coef, tc.entropy_coef, tc.max_grad_norm};
  int done_rollouts = 0;
  int iteration = 0;
  while (done_rollouts < tc.total_rollouts) {
    const int n = std::min(tc.rollouts_per_iteration, tc.total_rollouts - done_rollouts);
    const int it = iteration;
    const auto eps = run_episodes(
        env_cfg, tc.task, tc.profile, res.net, n, tc.workers,
        [&](int e) { return derive_seed({tc.seed, static_cast<std::uint64_t>(it), static_cast<std::uint64_t>(e)}); },
        tc.biomech, ActionMode::stochastic);
    RolloutBatch batch = make_batch(eps, tc);
    normalize_advantages(batch);
    Rng update_rng(derive_seed({tc.seed, 0x0BDA7Eu, static_cast<std::uint64_t>(it)}));
    IterationStats st;
    st.loss = ppo_update(res.net, opt, batch, pc, update_rng);
    for (const auto& e : eps) {
      res.net.norm.update(e.raw_obs);
      st.mean_reward += e.total_reward / n;
      st.success_rate += (e.success ? 1.0 : 0.0) / n;
    }
    done_rollouts += n;
    st.iteration = iteration;
    st.rollouts = done_rollouts;
    res.curve.push_back(st);
    if (on_iteration) on_iteration(st, res.net);
    ++iteration;
    if (!tc.checkpoint_dir.empty() && tc.checkpoint_every > 0 && iteration % tc.checkpoint_every == 0) {
      save_policy(res.net, tc.checkpoint_dir / ("checkpoint_" + std::to_string(iteration) + ".json"));
    }
  }
  return res;
}

struct PolicyEvaluation {
  std::vector<double> rewards;
  std::vector<bool> successes;
  double mean_reward = 0.0;
  double success_rate = 0.0;
};

inline std::uint64_t eval_seed(std::uint64_t seed, int episode) {
  return derive_seed({seed, 0xE7A1u, static_cast<std::uint64_t>(episode)});
}

/// Deterministic (mean-action) evaluation on `episodes` held-out humans.
inline PolicyEvaluation evaluate_policy(const PolicyNet& net, const envs::EnvConfig& env_cfg, Task task,
                                        RobotProfile profile, human::BiomechMode biomech, int episodes,
                                        std::uint64_t seed, int workers = 1) {
  const auto eps = run_episodes(
      env_cfg, task, profile, net, episodes, workers, [&](int e) { return eval_seed(seed, e); }, biomech,
      ActionMode::deterministic);
  PolicyEvaluation ev;
  for (const auto& e : eps) {
    ev.rewards.push_back(e.total_reward);
    ev.successes.push_back(e.success);
    ev.mean_reward += e.total_reward / episodes;
    ev.success_rate += (e.success ? 1.0 : 0.0) / episodes;
  }
  return ev;
}

}  // namespace avr::learn
