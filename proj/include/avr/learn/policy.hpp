#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "avr/core/task.hpp"
#include "avr/learn/mlp.hpp"

namespace avr::learn {

inline constexpr int kPolicyFormatVersion = 1;
inline constexpr int kHidden = 64;
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

/// Running observation statistics (parallel-merge form).
struct ObsNorm {
  Vector mean;
  Vector var;
  double count = 0.0;
  double clip = 10.0;

  static ObsNorm identity(int dim) {
    ObsNorm n;
    n.mean = Vector::Zero(dim);
    n.var = Vector::Ones(dim);
    return n;
  }

  Vector apply(const Vector& x) const {
    Vector z = (x - mean).array() / (var.array() + 1e-8).sqrt();
    return z.cwiseMax(-clip).cwiseMin(clip);
  }

  /// Merges the column statistics of `batch` (one observation per column).
  void update(const Matrix& batch) {
    const double n = static_cast<double>(batch.cols());
    if (n == 0.0) return;
    const Vector bm = batch.rowwise().mean();
    const Vector bv = (batch.colwise() - bm).array().square().rowwise().mean();
    const double tot = count + n;
    const Vector delta = bm - mean;
    const Vector m2 = var * count + bv * n + delta.cwiseProduct(delta) * (count * n / tot);
    mean += delta * (n / tot);
    var = m2 / tot;
    count = tot;
  }
};

/// Separate actor (obs -> 64 -> 64 -> act) and critic (obs -> 64 -> 64 -> 1)
/// networks plus a state-independent log-std, all in one flat vector:
/// [actor | critic | log_std].
struct PolicyNet {
  MlpLayout actor;
  MlpLayout critic;
  Vector theta;
  ObsNorm norm;
  Task task = Task::feeding;
  std::string train_config_hash;

  int obs_dim() const { return actor.input(); }
  int act_dim() const { return actor.output(); }
  std::size_t actor_offset() const { return 0; }
  std::size_t critic_offset() const { return actor.parameter_count(); }
  std::size_t log_std_offset() const { return actor.parameter_count() + critic.parameter_count(); }

  const double* actor_params() const { return theta.data(); }
  const double* critic_params() const { return theta.data() + critic_offset(); }
  Eigen::Map<const Vector> raw_log_std() const {
    return {theta.data() + log_std_offset(), static_cast<Eigen::Index>(act_dim())};
  }
  Vector log_std() const { return raw_log_std().cwiseMax(kLogStdMin).cwiseMin(kLogStdMax); }
  void clamp_log_std() {
    Eigen::Map<Vector> ls(theta.data() + log_std_offset(), act_dim());
    ls = ls.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  }
};

inline PolicyNet make_policy(int obs_dim, int act_dim, Rng& rng, double init_log_std = 0.0,
                             std::vector<int> hidden = {kHidden, kHidden}) {
  std::vector<int> a{obs_dim};
  a.insert(a.end(), hidden.begin(), hidden.end());
  std::vector<int> c = a;
  a.push_back(act_dim);
  c.push_back(1);
  PolicyNet net;
  net.actor = MlpLayout(a);
  net.critic = MlpLayout(c);
  net.theta = Vector::Zero(static_cast<Eigen::Index>(net.log_std_offset() + static_cast<std::size_t>(act_dim)));
  net.actor.initialize(net.theta.data(), rng, 0.01);
  net.critic.initialize(net.theta.data() + net.critic_offset(), rng, 1.0);
  net.theta.tail(act_dim).setConstant(init_log_std);
  net.norm = ObsNorm::identity(obs_dim);
  return net;
}

struct PolicyOutput {
  Vector mean;
  double value = 0.0;
  Vector log_std;
};

/// Deterministic evaluation on one raw observation (normalized internally).
inline PolicyOutput policy_forward(const PolicyNet& net, const Vector& obs) {
  if (obs.size() != net.obs_dim()) {
    throw DimensionMismatch(static_cast<std::size_t>(net.obs_dim()), static_cast<std::size_t>(obs.size()));
  }
  const Matrix x = net.norm.apply(obs);
  PolicyOutput out;
  out.mean = mlp_forward(net.actor, net.actor_params(), x).output().col(0);
  out.value = mlp_forward(net.critic, net.critic_params(), x).output()(0, 0);
  out.log_std = net.log_std();
  return out;
}

inline double gaussian_log_prob(const Vector& x, const Vector& mean, const Vector& log_std) {
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  double lp = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double z = (x[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
  }
  return lp;
}

inline nlohmann::json policy_to_json(const PolicyNet& net) {
  auto layers = [&](const MlpLayout& m, const double* th) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t l = 0; l < m.layers(); ++l) {
      const auto W = m.weight(th, l);
      const auto b = m.bias(th, l);
      out.push_back({{"rows", W.rows()},
                     {"cols", W.cols()},
                     {"W", std::vector<double>(W.data(), W.data() + W.size())},
                     {"b", std::vector<double>(b.data(), b.data() + b.size())}});
    }
    return out;
  };
  const Vector ls = net.raw_log_std();
  return {{"format_version", kPolicyFormatVersion},
          {"task", to_string(net.task)},
          {"obs_dim", net.obs_dim()},
          {"act_dim", net.act_dim()},
          {"layer_dims", net.actor.sizes()},
          {"critic_dims", net.critic.sizes()},
          {"activation", "tanh"},
          {"actor", layers(net.actor, net.actor_params())},
          {"critic", layers(net.critic, net.critic_params())},
          {"log_std", std::vector<double>(ls.data(), ls.data() + ls.size())},
          {"obs_norm",
           {{"mean", std::vector<double>(net.norm.mean.data(), net.norm.mean.data() + net.norm.mean.size())},
            {"var", std::vector<double>(net.norm.var.data(), net.norm.var.data() + net.norm.var.size())},
            {"count", net.norm.count},
            {"clip", net.norm.clip}}},
          {"training_config_hash", net.train_config_hash}};
}

inline PolicyNet policy_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kPolicyFormatVersion) {
      throw SchemaError("unsupported policy format_version");
    }
    if (j.at("activation").get<std::string>() != "tanh") throw SchemaError("policy activation must be tanh");
    PolicyNet net;
    net.task = task_from_string(j.at("task").get<std::string>());
    net.actor = MlpLayout(j.at("layer_dims").get<std::vector<int>>());
    net.critic = MlpLayout(j.at("critic_dims").get<std::vector<int>>());
    if (net.actor.input() != j.at("obs_dim").get<int>() || net.actor.output() != j.at("act_dim").get<int>() ||
        net.critic.input() != net.actor.input() || net.critic.output() != 1) {
      throw SchemaError("policy layer dims disagree with obs_dim/act_dim");
    }
    net.theta = Vector::Zero(static_cast<Eigen::Index>(net.log_std_offset()) + net.act_dim());
    auto read_layers = [&](const nlohmann::json& arr, const MlpLayout& m, double* th) {
      if (!arr.is_array() || arr.size() != m.layers()) throw SchemaError("policy layer count mismatch");
      for (std::size_t l = 0; l < m.layers(); ++l) {
        const auto W = arr[l].at("W").get<std::vector<double>>();
        const auto b = arr[l].at("b").get<std::vector<double>>();
        auto Wm = m.weight(th, l);
        auto bm = m.bias(th, l);
        if (W.size() != static_cast<std::size_t>(Wm.size()) || b.size() != static_cast<std::size_t>(bm.size())) {
          throw SchemaError("policy weight shape mismatch in layer " + std::to_string(l));
        }
        std::copy(W.begin(), W.end(), Wm.data());
        std::copy(b.begin(), b.end(), bm.data());
      }
    };
    read_layers(j.at("actor"), net.actor, net.theta.data());
    read_layers(j.at("critic"), net.critic, net.theta.data() + net.critic_offset());
    const auto ls = j.at("log_std").get<std::vector<double>>();
    if (ls.size() != static_cast<std::size_t>(net.act_dim())) throw SchemaError("log_std length mismatch");
    std::copy(ls.begin(), ls.end(), net.theta.data() + net.log_std_offset());
    const auto& n = j.at("obs_norm");
    const auto mean = n.at("mean").get<std::vector<double>>();
    const auto var = n.at("var").get<std::vector<double>>();
    if (mean.size() != static_cast<std::size_t>(net.obs_dim()) || var.size() != mean.size()) {
      throw SchemaError("obs_norm length mismatch");
    }
    net.norm.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    net.norm.var = Eigen::Map<const Vector>(var.data(), static_cast<Eigen::Index>(var.size()));
    net.norm.count = n.at("count").get<double>();
    net.norm.clip = n.value("clip", 10.0);
    net.train_config_hash = j.value("training_config_hash", std::string());
    if (!net.theta.allFinite()) throw SchemaError("policy weights must be finite");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("policy file: ") + e.what());
  }
}

inline void save_policy(const PolicyNet& net, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("IoError", "cannot write " + path.string());
  os << policy_to_json(net).dump() << "\n";
}

inline PolicyNet load_policy(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("IoError", "cannot open " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return policy_from_json(j);
}

}  // namespace avr::learn
