#include <gtest/gtest.h>

#include "avr/learn/train.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace avr;
using namespace avr::learn;

namespace {

std::vector<std::vector<std::vector<double>>> weights_of(const MlpLayout& m, const double* th) {
  std::vector<std::vector<std::vector<double>>> W;
  for (std::size_t l = 0; l < m.layers(); ++l) {
    const auto w = m.weight(th, l);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(w(i, j));
    W.push_back(rows);
  }
  return W;
}

std::vector<std::vector<double>> biases_of(const MlpLayout& m, const double* th) {
  std::vector<std::vector<double>> b;
  for (std::size_t l = 0; l < m.layers(); ++l) {
    const auto v = m.bias(th, l);
    b.emplace_back(v.data(), v.data() + v.size());
  }
  return b;
}

}  // namespace

TEST(Mlp, ForwardMatchesDenseOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const MlpLayout m({6, 9, 7, 4});
    Vector th(static_cast<Eigen::Index>(m.parameter_count()));
    for (Eigen::Index i = 0; i < th.size(); ++i) th[i] = standard_normal(rng);
    Vector x(6);
    for (int i = 0; i < 6; ++i) x[i] = standard_normal(rng);
    const Vector y = mlp_forward(m, th.data(), x).output().col(0);
    const auto o = oracle::dense_forward(weights_of(m, th.data()), biases_of(m, th.data()),
                                         std::vector<double>(x.data(), x.data() + 6));
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(y[i], o[static_cast<std::size_t>(i)], 1e-12);
  }
}

TEST(Mlp, ZeroWeightsGiveBiasOutput) {
  const MlpLayout m({3, 5, 2});
  Vector th = Vector::Zero(static_cast<Eigen::Index>(m.parameter_count()));
  m.bias(th.data(), 1) << 0.25, -1.5;
  const Vector y = mlp_forward(m, th.data(), Vector::Ones(3)).output().col(0);
  EXPECT_EQ(y[0], 0.25);
  EXPECT_EQ(y[1], -1.5);
  EXPECT_THROW(mlp_forward(m, th.data(), Vector::Ones(4)), DimensionMismatch);
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  Rng rng(4);
  const MlpLayout m({4, 6, 3});
  Vector th(static_cast<Eigen::Index>(m.parameter_count()));
  for (Eigen::Index i = 0; i < th.size(); ++i) th[i] = standard_normal(rng);
  Matrix x(4, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
  // L = sum(output), so dL/doutput = 1.
  Vector g = Vector::Zero(th.size());
  mlp_backward(m, th.data(), mlp_forward(m, th.data(), x), Matrix::Ones(3, 5), g.data());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < th.size(); ++i) {
    Vector tp = th, tm = th;
    tp[i] += h;
    tm[i] -= h;
    const double fd = (mlp_forward(m, tp.data(), x).output().sum() - mlp_forward(m, tm.data(), x).output().sum()) / (2 * h);
    EXPECT_LT(gradcheck::rel(g[i], fd), 1e-4) << "param " << i;
  }
}

TEST(Gae, MatchesBruteForce) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(uniform(rng, 0, 30));
    std::vector<double> r(n), v(n + 1);
    std::vector<bool> d(n);
    for (auto& x : r) x = standard_normal(rng);
    for (auto& x : v) x = standard_normal(rng);
    for (std::size_t i = 0; i < n; ++i) d[i] = uniform(rng, 0, 1) < 0.15;
    const double gamma = uniform(rng, 0.5, 1.0), lambda = uniform(rng, 0.5, 1.0);
    const GaeResult g = gae(r, v, d, gamma, lambda);
    const auto o = oracle::gae_bruteforce(r, v, d, gamma, lambda);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(g.advantages[i], o[i], 1e-10);
      EXPECT_NEAR(g.returns[i], o[i] + v[i], 1e-10);
    }
  }
}

TEST(Gae, LambdaZeroIsOneStepTd) {
  const std::vector<double> r{1.0, 2.0, 3.0}, v{0.5, 0.25, 0.125, 4.0};
  const std::vector<bool> d{false, false, true};
  const GaeResult g = gae(r, v, d, 0.9, 0.0);
  EXPECT_DOUBLE_EQ(g.advantages[0], 1.0 + 0.9 * 0.25 - 0.5);
  EXPECT_DOUBLE_EQ(g.advantages[1], 2.0 + 0.9 * 0.125 - 0.25);
  EXPECT_DOUBLE_EQ(g.advantages[2], 3.0 - 0.125);  // done: no bootstrap
  EXPECT_THROW(gae(r, {0.0}, d, 0.9, 0.9), DimensionMismatch);
}

TEST(PpoLoss, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const gradcheck::Toy toy = gradcheck::make_toy(seed);
    const gradcheck::Errors e = gradcheck::check(toy, {0.2, 0.5, 0.01});
    EXPECT_LT(e.actor, 1e-4) << "seed " << seed;
    EXPECT_LT(e.critic, 1e-4) << "seed " << seed;
    EXPECT_LT(e.log_std, 1e-4) << "seed " << seed;
    EXPECT_LT(e.entropy, 1e-4) << "seed " << seed;
  }
}

TEST(PpoLoss, ClippedSamplesPassNoActorGradient) {
  gradcheck::Toy toy = gradcheck::make_toy(9, 4, 2, 1);
  // ratio = e^0.5 > 1.2 with positive advantage: the clipped branch is taken.
  const Vector mean = mlp_forward(toy.net.actor, toy.net.actor_params(), toy.batch.obs).output().col(0);
  toy.batch.log_probs[0] = gaussian_log_prob(toy.batch.actions.col(0), mean, toy.net.log_std()) - 0.5;
  toy.batch.advantages[0] = 1.0;
  const LossGrad lg = ppo_loss(toy.net, toy.batch, toy.idx, {0.2, 0.0, 0.0});
  EXPECT_EQ(lg.grad.head(static_cast<Eigen::Index>(toy.net.critic_offset())).norm(), 0.0);
  EXPECT_EQ(lg.grad.tail(toy.net.act_dim()).norm(), 0.0);
  EXPECT_EQ(lg.stats.clip_fraction, 1.0);
}

TEST(PpoLoss, ZeroAdvantageZeroValueErrorGivesZeroGradient) {
  gradcheck::Toy toy = gradcheck::make_toy(10);
  const Matrix v = mlp_forward(toy.net.critic, toy.net.critic_params(), toy.batch.obs).output();
  for (std::size_t k = 0; k < toy.batch.size(); ++k) {
    toy.batch.advantages[k] = 0.0;
    toy.batch.returns[k] = v(0, static_cast<Eigen::Index>(k));
  }
  const LossGrad lg = ppo_loss(toy.net, toy.batch, toy.idx, {0.2, 0.5, 0.0});
  EXPECT_EQ(lg.grad.norm(), 0.0);
}

TEST(Policy, JsonRoundTripIsExact) {
  Rng rng(6);
  PolicyNet net = make_policy(21, 7, rng, -0.5);
  net.task = Task::drinking;
  net.train_config_hash = "abc";
  Matrix batch(21, 30);
  for (Eigen::Index i = 0; i < batch.size(); ++i) batch.data()[i] = standard_normal(rng);
  net.norm.update(batch);
  const PolicyNet back = policy_from_json(nlohmann::json::parse(policy_to_json(net).dump()));
  EXPECT_EQ(back.theta, net.theta);
  EXPECT_EQ(back.norm.mean, net.norm.mean);
  EXPECT_EQ(back.norm.var, net.norm.var);
  EXPECT_EQ(back.task, Task::drinking);
  EXPECT_EQ(back.train_config_hash, "abc");
  Vector obs = Vector::Ones(21);
  EXPECT_EQ(policy_forward(back, obs).mean, policy_forward(net, obs).mean);
}

TEST(Policy, RejectsMalformedFiles) {
  Rng rng(7);
  nlohmann::json j = policy_to_json(make_policy(5, 2, rng));
  j["format_version"] = 2;
  EXPECT_THROW(policy_from_json(j), SchemaError);
  j = policy_to_json(make_policy(5, 2, rng));
  j["log_std"] = {0.0};
  EXPECT_THROW(policy_from_json(j), SchemaError);
  j = policy_to_json(make_policy(5, 2, rng));
  j.erase("actor");
  EXPECT_THROW(policy_from_json(j), SchemaError);
}

TEST(ObsNorm, MergeMatchesWholeBatchStatistics) {
  Rng rng(8);
  Matrix all(3, 100);
  for (Eigen::Index i = 0; i < all.size(); ++i) all.data()[i] = 2.0 + 3.0 * standard_normal(rng);
  ObsNorm a = ObsNorm::identity(3), b = ObsNorm::identity(3);
  a.update(all);
  b.update(all.leftCols(37));
  b.update(all.rightCols(63));
  EXPECT_LT((a.mean - b.mean).norm(), 1e-12);
  EXPECT_LT((a.var - b.var).norm(), 1e-12);
}

TEST(Train, ZeroRolloutsReturnsInitialPolicy) {
  TrainConfig tc;
  tc.total_rollouts = 0;
  const TrainResult r = train(tc, envs::default_env_config());
  EXPECT_TRUE(r.curve.empty());
  EXPECT_EQ(r.net.theta, initial_policy(tc, envs::observation_size(tc.task)).theta);
}

TEST(Train, DeterministicForSeedAndWorkers) {
  TrainConfig tc;
  tc.total_rollouts = 4;
  tc.rollouts_per_iteration = 2;
  tc.minibatch = 128;
  tc.epochs = 2;
  const TrainResult a = train(tc, envs::default_env_config());
  const TrainResult b = train(tc, envs::default_env_config());
  EXPECT_EQ(a.net.theta, b.net.theta);
  ASSERT_EQ(a.curve.size(), 2u);
  EXPECT_EQ(a.curve[1].mean_reward, b.curve[1].mean_reward);
  tc.workers = 2;
  const TrainResult c = train(tc, envs::default_env_config());
  EXPECT_EQ(a.net.theta, c.net.theta);
  EXPECT_NE(a.net.theta, initial_policy(tc, envs::observation_size(tc.task)).theta);
}

TEST(Train, ValidatesConfig) {
  TrainConfig tc;
  tc.gamma = 1.5;
  EXPECT_THROW(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.workers = 0;
  EXPECT_THROW(tc.validate(), ConfigError);
}

TEST(Train, ActionMappingClampsToStepLimit) {
  Vector u(7);
  u << 2.0, -3.0, 0.5, 0.0, std::numeric_limits<double>::quiet_NaN(), -0.25, 1.0;
  const robot::Action a = to_action(u, 0.05);
  EXPECT_DOUBLE_EQ(a.delta[0], 0.05);
  EXPECT_DOUBLE_EQ(a.delta[1], -0.05);
  EXPECT_DOUBLE_EQ(a.delta[2], 0.025);
  EXPECT_EQ(a.delta[4], 0.0);
}
