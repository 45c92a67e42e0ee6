#pragma once

#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

#include "avr/learn/policy.hpp"

namespace avr::learn {

class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(const std::string& what) : Error("NonFiniteLoss", what) {}
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// `values` has one extra entry: the bootstrap value after the last step.
inline GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values,
                     const std::vector<bool>& dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1 || dones.size() != n) {
    throw DimensionMismatch(n + 1, values.size() != n + 1 ? values.size() : dones.size() + 1);
  }
  GaeResult r;
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double next = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * values[k + 1] * live - values[k];
    next = delta + gamma * lambda * live * next;
    r.advantages[k] = next;
    r.returns[k] = next + values[k];
  }
  return r;
}

/// Flattened rollout data. Observations are stored already normalized.
struct RolloutBatch {
  Matrix obs;       // obs_dim x N
  Matrix actions;   // act_dim x N, unclamped samples
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<bool> dones;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return log_probs.size(); }
};

struct LossWeights {
  double clip = 0.2;
  double value = 0.5;
  double entropy = 0.0;
};

struct LossStats {
  double actor = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

struct LossGrad {
  LossStats stats;
  Vector grad;
};

/// Loss = -mean(min(r A, clip(r) A)) + w_v mean((V - R)^2) - w_e * entropy,
/// with its exact gradient w.r.t. net.theta over the columns in `idx`.
inline LossGrad ppo_loss(const PolicyNet& net, const RolloutBatch& b, const std::vector<std::size_t>& idx,
                         const LossWeights& w) {
  const auto B = static_cast<Eigen::Index>(idx.size());
  const int A = net.act_dim();
  Matrix x(net.obs_dim(), B);
  Matrix act(A, B);
  for (Eigen::Index k = 0; k < B; ++k) {
    x.col(k) = b.obs.col(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(k)]));
    act.col(k) = b.actions.col(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(k)]));
  }
  const MlpTrace at = mlp_forward(net.actor, net.actor_params(), x);
  const MlpTrace ct = mlp_forward(net.critic, net.critic_params(), x);
  const Vector raw_ls = net.raw_log_std();
  const Vector ls = net.log_std();
  const Vector inv_std = (-ls).array().exp();

  LossGrad out;
  out.grad = Vector::Zero(net.theta.size());
  Matrix d_mean(A, B);
  Matrix d_value(1, B);
  Vector d_log_std = Vector::Zero(A);
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  const double invB = 1.0 / static_cast<double>(B);
  int clipped = 0;
  for (Eigen::Index k = 0; k < B; ++k) {
    const std::size_t n = idx[static_cast<std::size_t>(k)];
    const Vector z = (act.col(k) - at.output().col(k)).cwiseProduct(inv_std);
    const double logp = -0.5 * z.squaredNorm() - ls.sum() - A * kHalfLog2Pi;
    const double ratio = std::exp(logp - b.log_probs[n]);
    const double adv = b.advantages[n];
    const double clipped_ratio = std::clamp(ratio, 1.0 - w.clip, 1.0 + w.clip);
    const double unclipped = ratio * adv;
    const double surr = std::min(unclipped, clipped_ratio * adv);
    const bool active = unclipped <= clipped_ratio * adv;
    clipped += ratio != clipped_ratio ? 1 : 0;
    out.stats.actor -= surr * invB;
    out.stats.approx_kl += (b.log_probs[n] - logp) * invB;
    // dL/dlogp for this sample
    const double g = active ? -unclipped * invB : 0.0;
    d_mean.col(k) = g * z.cwiseProduct(inv_std);
    d_log_std += g * (z.array().square() - 1.0).matrix();

    const double v = ct.output()(0, k);
    const double err = v - b.returns[n];
    out.stats.value += w.value * err * err * invB;
    d_value(0, k) = 2.0 * w.value * err * invB;
  }
  out.stats.clip_fraction = clipped * invB;
  out.stats.entropy = ls.sum() + A * (kHalfLog2Pi + 0.5);
  d_log_std.array() -= w.entropy;
  // clamped log-std entries pass no gradient
  for (int i = 0; i < A; ++i) {
    if (raw_ls[i] < kLogStdMin || raw_ls[i] > kLogStdMax) d_log_std[i] = 0.0;
  }
  out.stats.total = out.stats.actor + out.stats.value - w.entropy * out.stats.entropy;

  mlp_backward(net.actor, net.actor_params(), at, d_mean, out.grad.data());
  mlp_backward(net.critic, net.critic_params(), ct, d_value, out.grad.data() + net.critic_offset());
  out.grad.segment(static_cast<Eigen::Index>(net.log_std_offset()), A) = d_log_std;
  return out;
}

class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : m_(Vector::Zero(n)), v_(Vector::Zero(n)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

  void step(Vector& theta, const Vector& grad) {
    ++t_;
    m_ = b1_ * m_ + (1.0 - b1_) * grad;
    v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(b1_, t_);
    const double c2 = 1.0 - std::pow(b2_, t_);
    theta.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

  void set_lr(double lr) { lr_ = lr; }
  int steps() const { return t_; }

 private:
  Vector m_;
  Vector v_;
  double lr_ = 3e-4;
  double b1_ = 0.9;
  double b2_ = 0.999;
  double eps_ = 1e-8;
  int t_ = 0;
};

struct PpoConfig {
  double clip = 0.2;
  int epochs = 4;
  std::size_t minibatch = 512;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
};

inline void normalize_advantages(RolloutBatch& b) {
  const double n = static_cast<double>(b.advantages.size());
  if (n == 0) return;
  const double mean = std::accumulate(b.advantages.begin(), b.advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : b.advantages) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n);
  for (double& a : b.advantages) a = (a - mean) / (sd + 1e-8);
}

/// Minibatch SGD epochs over an already-normalized batch. Stats are averaged
/// over minibatches of the last epoch.
inline LossStats ppo_update(PolicyNet& net, Adam& opt, const RolloutBatch& batch, const PpoConfig& cfg, Rng& rng) {
  if (batch.size() == 0) throw ValidationError("ppo_update: empty batch");
  const LossWeights w{cfg.clip, cfg.value_coef, cfg.entropy_coef};
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  LossStats last;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    LossStats acc;
    int mbs = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.minibatch) {
      const std::size_t end = std::min(order.size(), start + cfg.minibatch);
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
      LossGrad lg = ppo_loss(net, batch, idx, w);
      if (!std::isfinite(lg.stats.total) || !lg.grad.allFinite()) {
        std::ostringstream os;
        os << "non-finite loss at epoch " << epoch << " minibatch " << mbs << ": actor=" << lg.stats.actor
           << " value=" << lg.stats.value << " entropy=" << lg.stats.entropy;
        throw NonFiniteLoss(os.str());
      }
      const double gn = lg.grad.norm();
      if (cfg.max_grad_norm > 0.0 && gn > cfg.max_grad_norm) lg.grad *= cfg.max_grad_norm / gn;
      opt.step(net.theta, lg.grad);
      net.clamp_log_std();
      acc.actor += lg.stats.actor;
      acc.value += lg.stats.value;
      acc.entropy += lg.stats.entropy;
      acc.total += lg.stats.total;
      acc.clip_fraction += lg.stats.clip_fraction;
      acc.approx_kl += lg.stats.approx_kl;
      ++mbs;
    }
    const double inv = 1.0 / mbs;
    last = {acc.actor * inv, acc.value * inv, acc.entropy * inv, acc.total * inv, acc.clip_fraction * inv,
            acc.approx_kl * inv};
  }
  return last;
}

}  // namespace avr::learn
