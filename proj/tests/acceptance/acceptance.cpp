// Acceptance run: one PASS/FAIL line per headline criterion, thresholds
// fixed here. Exit status is the number of failures.

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "avr/eval/evaluate.hpp"
#include "avr/eval/stats.hpp"
#include "avr/human/biomechanics.hpp"
#include "avr/human/retarget.hpp"
#include "avr/kinematics/ik_dls.hpp"
#include "avr/learn/train.hpp"
#include "avr/robot/robot.hpp"
#include "support/gradcheck.hpp"
#include "support/live_client.hpp"
#include "support/oracles.hpp"
#include "support/tamper.hpp"

using namespace avr;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void criterion(const std::string& name, double time_limit_s, const std::function<Verdict()>& body) {
  const auto t0 = Clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::ostringstream detail;
  detail << v.detail << "; " << std::fixed;
  detail.precision(2);
  detail << secs << " s";
  if (time_limit_s > 0) {
    detail << " (limit " << time_limit_s << " s)";
    if (secs >= time_limit_s) v.pass = false;
  }
  if (!v.pass) ++failures;
  std::printf("%s  %-28s %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), detail.str().c_str());
  std::fflush(stdout);
}

void info(const std::string& name, const std::string& text) {
  std::printf("INFO  %-28s %s\n", name.c_str(), text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

kin::JointVector random_q(Rng& rng, const kin::JointChain& c) {
  kin::JointVector q(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) q[static_cast<Eigen::Index>(i)] = uniform(rng, c.link(i).lower, c.link(i).upper);
  return q;
}

struct IkTally {
  int ok = 0;
  int over_budget = 0;
};

// Targets are FK images of random in-limit configurations, so all are
// reachable; IK starts from the profile's neutral pose.
IkTally ik_round_trip(RobotProfile p, int n, std::uint64_t seed) {
  const robot::RobotModel& m = robot::default_robot_model(p);
  Rng rng(seed);
  IkTally t;
  for (int k = 0; k < n; ++k) {
    const kin::IkResult r = kin::ik_dls(m.chain, m.neutral_q, kin::end_effector(m.chain, random_q(rng, m.chain)));
    if (r.iterations > 100) ++t.over_budget;
    if (r.position_residual < 0.01 && r.orientation_residual < 0.05 && r.iterations <= 100) ++t.ok;
  }
  return t;
}

Vec3 random_unit(Rng& rng) { return Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng)).normalized(); }

Pose6 random_pose(Rng& rng, double scale) {
  return {Vec3(uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale)),
          Quat(Eigen::AngleAxisd(uniform(rng, -kPi, kPi), random_unit(rng)))};
}

double jacobian_fd_error(const kin::JointChain& c, const kin::JointVector& q) {
  const kin::Jacobian J = kin::jacobian(c, q);
  double worst = 0.0;
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    kin::JointVector qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const Pose6 a = kin::end_effector(c, qp), b = kin::end_effector(c, qm);
    const Vec3 lin = (a.position - b.position) / (2 * h);
    const Vec3 ang = rotation_vector(a.orientation * b.orientation.conjugate()) / (2 * h);
    worst = std::max({worst, (lin - J.col(i).head<3>()).cwiseAbs().maxCoeff(),
                      (ang - J.col(i).tail<3>()).cwiseAbs().maxCoeff()});
  }
  return worst;
}

// ---------------------------------------------------------------------------

Verdict retargeting_oracle() {
  using namespace human;
  int exact = 0;
  const WaistAngles a = align_waist(Vec3(0, 0, 1), Vec3::Zero());
  exact += a.roll == 0.0 && a.pitch == 0.0 && a.yaw == kPi / 2;
  const WaistAngles b = align_waist(Vec3(1, 0, 1), Vec3::Zero());
  exact += b.roll == 0.0 && b.pitch == kPi / 4 && b.yaw == kPi / 2;
  const WaistAngles c = align_waist(Vec3(0, 1, 0), Vec3::Zero());
  exact += c.roll == kPi / 2 && c.pitch == 0.0 && c.yaw == 0.0;

  Rng rng(2024);
  double worst = 0.0;
  int n = 0;
  while (n < 1000) {
    const Vec3 W(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    const Vec3 psi(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    if (psi.norm() < 1e-3) continue;
    const WaistAngles w = align_waist(W + psi, W);
    const Vec3 d = (W + psi) - W;
    const auto o = oracle::waist_angles(d.x(), d.y(), d.z());
    worst = std::max({worst, std::abs(w.roll - o[0]), std::abs(w.pitch - o[1]), std::abs(w.yaw - o[2])});
    ++n;
  }
  return {exact == 3 && worst <= 1e-9,
          "hand cases exact " + std::to_string(exact) + "/3, 1000 random psi max |err| " + fmt("%.2e", worst) +
              " (tol 1e-9)"};
}

Verdict split_yaw_exact() {
  Rng rng(5);
  int ratio_ok = 0, sum_ok = 0;
  for (int i = 0; i < 10000; ++i) {
    const double th = uniform(rng, -4, 4), y = uniform(rng, -4, 4);
    const human::YawSplit s = human::split_yaw(th, y);
    const double d = th - y;
    ratio_ok += s.head == 0.7 * d && s.waist == 0.3 * d;
    // 0.7d + 0.3d can differ from d in the last bit; allow rounding only.
    sum_ok += std::abs((s.head + s.waist) - d) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(d);
  }
  return {ratio_ok == 10000 && sum_ok == 10000,
          "0.7/0.3 exact " + std::to_string(ratio_ok) + "/10000, head+waist = theta-y " + std::to_string(sum_ok) +
              "/10000"};
}

Verdict ik_suite() {
  const IkTally b = ik_round_trip(RobotProfile::armB, 500, 7);

  // Planar two-link arm against the closed-form solution, both elbow branches.
  std::vector<kin::Link> links = {{"shoulder", Pose6::identity(), Vec3::UnitZ(), -kPi, kPi},
                                  {"elbow", Pose6::from_translation({1, 0, 0}), Vec3::UnitZ(), -kPi, kPi}};
  const kin::JointChain two(links, Pose6::identity(), Pose6::from_translation({1, 0, 0}));
  Rng rng(13);
  int two_ok = 0, two_n = 0;
  for (int k = 0; k < 50; ++k) {
    const double r = uniform(rng, 0.3, 1.9), phi = uniform(rng, -kPi, kPi);
    const double x = r * std::cos(phi), y = r * std::sin(phi);
    for (auto br : oracle::two_link_ik(1.0, 1.0, x, y)) {
      // atan2 differences can leave (-pi, pi]; the joint limits cannot.
      br[0] = std::remainder(br[0], 2 * kPi);
      const Pose6 target{Vec3(x, y, 0), Quat(Eigen::AngleAxisd(br[0] + br[1], Vec3::UnitZ()))};
      kin::IkParams p;
      p.position_tolerance = 1e-5;
      p.orientation_tolerance = 1e-5;
      kin::JointVector q0(2);
      q0 << std::clamp(br[0] + 0.3, -kPi, kPi), std::clamp(br[1] - 0.3, -kPi, kPi);
      const kin::IkResult res = kin::ik_dls(two, q0, target, p);
      const double e0 = std::abs(std::remainder(res.q[0] - br[0], 2 * kPi));
      const double e1 = std::abs(std::remainder(res.q[1] - br[1], 2 * kPi));
      two_ok += res.converged && e0 < 1e-3 && e1 < 1e-3;
      ++two_n;
    }
  }

  double jac = 0.0;
  for (int k = 0; k < 100; ++k) {
    std::vector<kin::Link> ls;
    for (int i = 0; i < 7; ++i) ls.push_back({"j" + std::to_string(i), random_pose(rng, 0.3), random_unit(rng), -2.5, 2.5});
    const kin::JointChain c(ls, random_pose(rng, 1.0), random_pose(rng, 0.2));
    jac = std::max(jac, jacobian_fd_error(c, random_q(rng, c)));
  }
  for (RobotProfile p : kAllProfiles) {
    const robot::RobotModel& m = robot::default_robot_model(p);
    for (int k = 0; k < 50; ++k) jac = std::max(jac, jacobian_fd_error(m.chain, random_q(rng, m.chain)));
  }
  const double rate = b.ok / 500.0;
  return {rate >= 0.95 && b.over_budget == 0 && two_ok == two_n && jac <= 1e-4,
          "armB round trip " + std::to_string(b.ok) + "/500 = " + fmt("%.1f%%", 100 * rate) + " (>= 95%), two-link " +
              std::to_string(two_ok) + "/" + std::to_string(two_n) + ", Jacobian FD max " + fmt("%.1e", jac) +
              " (<= 1e-4)"};
}

Verdict environment_suite() {
  const envs::EnvConfig& cfg = envs::default_env_config();
  std::vector<std::string> bad;
  // Success boundaries on finished states.
  auto finished = [&](Task t) {
    envs::EnvState s;
    s.task = t;
    s.t = cfg.episode.steps;
    return s;
  };
  auto particles = [](int captured, int total) {
    std::vector<envs::Particle> ps(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
      ps[static_cast<std::size_t>(i)].status = i < captured ? envs::ParticleStatus::captured : envs::ParticleStatus::spilled;
    }
    return ps;
  };
  auto markers = [](int wiped, int total) {
    std::vector<envs::Marker> ms(static_cast<std::size_t>(total));
    for (int i = 0; i < wiped; ++i) ms[static_cast<std::size_t>(i)].wiped = true;
    return ms;
  };
  envs::EnvState s = finished(Task::feeding);
  s.particles = particles(6, 8);
  if (!envs::success(s, cfg)) bad.push_back("6/8 feeding");
  s.particles = particles(5, 8);
  if (envs::success(s, cfg)) bad.push_back("5/8 feeding");
  s = finished(Task::scratching);
  s.scratch_count = 25;
  if (!envs::success(s, cfg)) bad.push_back("scratch 25");
  s.scratch_count = 24;
  if (envs::success(s, cfg)) bad.push_back("scratch 24");
  s = finished(Task::bathing);
  s.markers = markers(3, 10);
  if (!envs::success(s, cfg)) bad.push_back("bathing 3/10");
  s.markers = markers(2, 10);
  if (envs::success(s, cfg)) bad.push_back("bathing 2/10");

  int episodes = 0;
  for (Task task : kAllTasks) {
    for (RobotProfile p : kAllProfiles) {
      for (std::uint64_t ep = 0; ep < 3; ++ep) {
        envs::AssistEnv a(cfg, task, p), b(cfg, task, p);
        Rng ra(derive_seed({77, ep})), rb(derive_seed({77, ep}));
        a.reset(ra, human::BiomechMode::randomized);
        b.reset(rb, human::BiomechMode::randomized);
        const int total = static_cast<int>(a.state().particles.size());
        int captured = 0, spilled = 0, wiped = 0, scratches = 0, steps = 0;
        Rng act(derive_seed({78, ep}));
        while (!a.done()) {
          robot::Action u;
          for (double& d : u.delta) d = uniform(act, -0.05, 0.05);
          const envs::Transition x = a.step(u), y = b.step(u);
          ++steps;
          if (x.reward != y.reward || x.observation != y.observation) {
            bad.push_back(std::string("determinism ") + to_string(task));
            break;
          }
          const envs::ParticleCounts c = envs::count(a.state().particles);
          if (c.total() != total) bad.push_back(std::string("conservation ") + to_string(task));
          if (c.captured < captured || c.spilled < spilled || a.state().wiped_count() < wiped ||
              a.state().scratch_count < scratches) {
            bad.push_back(std::string("monotone counts ") + to_string(task));
          }
          captured = c.captured;
          spilled = c.spilled;
          wiped = a.state().wiped_count();
          scratches = a.state().scratch_count;
        }
        if (steps != 200) bad.push_back(std::string("episode length ") + to_string(task));
        if (envs::to_json(a.state()).dump() != envs::to_json(b.state()).dump()) {
          bad.push_back(std::string("final state ") + to_string(task));
        }
        ++episodes;
      }
    }
  }
  std::string d = std::to_string(episodes) + " episodes: conservation, monotone counts, 200 steps, bitwise determinism; "
                  "boundaries 6/8, 5/8, scratch 25/24, bathing 3/10, 2/10";
  if (!bad.empty()) d += "; failed: " + bad.front() + (bad.size() > 1 ? " (+" + std::to_string(bad.size() - 1) + ")" : "");
  return {bad.empty(), d};
}

Verdict ppo_gradient_check() {
  gradcheck::Errors worst;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const gradcheck::Errors e = gradcheck::check(gradcheck::make_toy(seed), {0.2, 0.5, 0.01});
    worst.actor = std::max(worst.actor, e.actor);
    worst.critic = std::max(worst.critic, e.critic);
    worst.log_std = std::max(worst.log_std, e.log_std);
    worst.entropy = std::max(worst.entropy, e.entropy);
  }
  return {worst.worst() <= 1e-4, "max relative error actor " + fmt("%.1e", worst.actor) + ", critic " +
                                     fmt("%.1e", worst.critic) + ", log-std " + fmt("%.1e", worst.log_std) +
                                     ", entropy " + fmt("%.1e", worst.entropy) + " (<= 1e-4)"};
}

// Shared by the two learning criteria.
struct Trained {
  learn::PolicyNet init;
  learn::PolicyNet net;
};

std::map<std::pair<int, std::uint64_t>, Trained> trained;

const Trained& train_once(human::BiomechMode mode, std::uint64_t seed) {
  const auto key = std::make_pair(static_cast<int>(mode), seed);
  auto it = trained.find(key);
  if (it != trained.end()) return it->second;
  learn::TrainConfig tc;
  tc.task = Task::feeding;
  tc.profile = RobotProfile::armA;
  tc.biomech = mode;
  tc.total_rollouts = 500;
  tc.seed = seed;
  Trained t{learn::initial_policy(tc, envs::observation_size(tc.task)), learn::train(tc, envs::default_env_config()).net};
  return trained.emplace(key, std::move(t)).first->second;
}

// Held out: evaluation seeds never coincide with the training streams, which
// are derived from the training seed.
constexpr std::uint64_t kEvalSeed = 99;

Verdict desk_scale_learning() {
  const envs::EnvConfig& cfg = envs::default_env_config();
  bool ok = true;
  std::string d;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Trained& t = train_once(human::BiomechMode::fixed, seed);
    const double before = eval::evaluate(t.init, cfg, Task::feeding, RobotProfile::armA, 100, kEvalSeed,
                                         human::BiomechMode::fixed).metrics.mean_reward;
    const double after = eval::evaluate(t.net, cfg, Task::feeding, RobotProfile::armA, 100, kEvalSeed,
                                        human::BiomechMode::fixed).metrics.mean_reward;
    ok = ok && after > before;
    d += (d.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + " init " + fmt("%.1f", before) +
         " -> trained " + fmt("%.1f", after);
  }
  return {ok, "feeding/armA, 500 rollouts, 100 held-out episodes: " + d};
}

Verdict revised_vs_original() {
  const envs::EnvConfig& cfg = envs::default_env_config();
  // The perturbed population is the randomized sampler itself: torso height
  // over the full range, waist angles within +-10 degrees.
  double orig = 0.0, rev = 0.0;
  std::string d;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const double o = eval::evaluate(train_once(human::BiomechMode::fixed, seed).net, cfg, Task::feeding,
                                    RobotProfile::armA, 100, kEvalSeed, human::BiomechMode::randomized)
                         .metrics.success_rate();
    const double r = eval::evaluate(train_once(human::BiomechMode::randomized, seed).net, cfg, Task::feeding,
                                    RobotProfile::armA, 100, kEvalSeed, human::BiomechMode::randomized)
                         .metrics.success_rate();
    orig += o / 3;
    rev += r / 3;
    d += (d.empty() ? "" : ", ") + fmt("%.2f", o) + "/" + fmt("%.2f", r);
  }
  return {rev >= orig, "mean success on perturbed population: revised " + fmt("%.3f", rev) + " >= original " +
                           fmt("%.3f", orig) + " (per seed original/revised " + d + ")"};
}

Verdict wilcoxon() {
  Rng rng(17);
  int agree = 0, cases = 0;
  for (std::size_t n = 1; n <= 12; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> d(n);
      for (double& x : d) {
        x = uniform(rng, -3, 3.5);
        if (rep % 2) x = std::round(x * 2) / 2;
      }
      if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) continue;
      const std::vector<double> zero(n, 0.0);
      const oracle::Enumerated e = oracle::wilcoxon_enumerate(d);
      const double two = eval::wilcoxon_signed_rank(d, zero, eval::Alternative::two_sided).p;
      const double gt = eval::wilcoxon_signed_rank(d, zero, eval::Alternative::greater).p;
      const double lt = eval::wilcoxon_signed_rank(d, zero, eval::Alternative::less).p;
      agree += std::abs(two - e.p_two_sided) <= 1e-12 && std::abs(gt - e.p_greater) <= 1e-12 &&
               std::abs(lt - e.p_less) <= 1e-12;
      ++cases;
    }
  }
  const eval::WilcoxonResult w5 = eval::wilcoxon_signed_rank({1, 2, 3, 4, 5}, std::vector<double>(5, 0.0));
  const eval::WilcoxonResult w8 = eval::wilcoxon_signed_rank({-1, -2, 3, 4, 5, 6, 7, 8}, std::vector<double>(8, 0.0));
  const bool known = w5.W == 0 && std::abs(w5.p - 0.0625) < 1e-12 && w8.W == 3 && std::abs(w8.p - 0.0390625) < 1e-12;

  // Every attainable W+ for n = 15..20, untied ranks.
  double worst = 0.0;
  for (std::size_t n = 15; n <= 20; ++n) {
    for (std::size_t w = 0; w <= n * (n + 1) / 2; ++w) {
      std::vector<double> d(n);
      std::size_t left = w;
      for (std::size_t r = n; r >= 1; --r) {
        const bool pos = r <= left;
        if (pos) left -= r;
        d[r - 1] = pos ? static_cast<double>(r) : -static_cast<double>(r);
      }
      const std::vector<double> zero(n, 0.0);
      const double ex = eval::wilcoxon_signed_rank(d, zero, eval::Alternative::two_sided, eval::WilcoxonMethod::exact).p;
      const double ap =
          eval::wilcoxon_signed_rank(d, zero, eval::Alternative::two_sided, eval::WilcoxonMethod::normal_approx).p;
      worst = std::max(worst, std::abs(ex - ap));
    }
  }
  return {agree == cases && known && worst <= 0.01,
          "exact = enumeration " + std::to_string(agree) + "/" + std::to_string(cases) + " (n <= 12), W=0/n=5 p=" +
              fmt("%.4f", w5.p) + ", W=3/n=8 p=" + fmt("%.4f", w8.p) + ", normal vs exact n=15..20 max " +
              fmt("%.4f", worst) + " (<= 0.01)"};
}

Verdict biomech_ks() {
  std::string d;
  bool ok = true;
  for (human::Sex sex : {human::Sex::male, human::Sex::female}) {
    Rng rng(sex == human::Sex::male ? 31 : 32);
    std::vector<double> h;
    for (int i = 0; i < 10000; ++i) {
      h.push_back(human::sample_biomechanics(rng, sex, human::BiomechMode::randomized).anthro.torso_height);
    }
    const human::TorsoRange r = human::torso_range(sex);
    const double ks = oracle::ks_uniform(h, r.lo, r.hi);
    ok = ok && ks < 0.02;
    d += (d.empty() ? "" : ", ") + std::string(sex == human::Sex::male ? "male" : "female") + " U(" +
         fmt("%.2f", r.lo) + "," + fmt("%.2f", r.hi) + ") D=" + fmt("%.4f", ks);
  }
  return {ok, d + " (< 0.02, 10000 samples each)"};
}

Verdict replay_integrity() {
  const envs::EnvConfig& cfg = envs::default_env_config();
  std::vector<eval::EpisodeRecord> recs;
  for (Task task : kAllTasks) {
    learn::TrainConfig tc;
    tc.task = task;
    const learn::PolicyNet net =
        task == Task::feeding ? train_once(human::BiomechMode::fixed, 1).net : learn::initial_policy(tc, envs::observation_size(task));
    for (RobotProfile p : kAllProfiles) {
      for (human::BiomechMode m : {human::BiomechMode::fixed, human::BiomechMode::randomized}) {
        auto r = eval::evaluate(net, cfg, task, p, task == Task::feeding ? 7 : 6, 500 + recs.size(), m).records;
        recs.insert(recs.end(), r.begin(), r.end());
      }
    }
  }
  recs.resize(100);
  int clean = 0, detected = 0, tampers = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    // Records travel through the file format before replay.
    std::stringstream ss;
    eval::write_record(ss, recs[i]);
    const eval::EpisodeRecord back = eval::read_record(ss);
    clean += eval::replay(back, cfg).clean;
    const auto edits = tamper::single_field_edits((i * 37) % 200);
    for (std::size_t k = 0; k < edits.size(); ++k) {
      if (i >= 10 && k != i % edits.size()) continue;  // every edit on the first ten, one each after
      eval::EpisodeRecord bad = back;
      edits[k].apply(bad);
      detected += tamper::detected(bad, cfg);
      ++tampers;
    }
  }
  return {clean == 100 && detected == tampers, std::to_string(clean) + "/100 episodes replay clean, " +
                                                   std::to_string(detected) + "/" + std::to_string(tampers) +
                                                   " single-field tampers detected"};
}

Verdict live_timing() {
  auto so = std::make_shared<live::SessionOptions>();
  learn::TrainConfig tc;
  so->policies["feeding"] = std::make_shared<learn::PolicyNet>(train_once(human::BiomechMode::fixed, 1).net);
  tc.task = Task::scratching;
  so->policies["scratching"] = std::make_shared<learn::PolicyNet>(learn::initial_policy(tc, envs::observation_size(tc.task)));
  // Real 10 Hz clock.
  live_client::ServerThread server(so, std::chrono::milliseconds(100));

  live_client::Script flood;
  flood.sid = "flood";
  flood.start = {{"task", "scratching"}, {"robot", "armB"}, {"policy", "scratching"}};
  flood.trace = live_client::make_trace(Task::scratching, 50, 0.1);
  flood.flood_period = std::chrono::milliseconds(1);
  const live_client::Outcome f = live_client::run_script(server.port(), flood);
  const std::size_t flood_steps = f.of_type("state").size();

  live_client::Script step;
  step.sid = "trace";
  step.start = {{"task", "feeding"}, {"robot", "armA"}, {"policy", "feeding"}};
  step.trace = live_client::make_trace(Task::feeding, 200, 0.1);
  const live_client::Outcome a = live_client::run_script(server.port(), step);
  const live_client::Outcome b = live_client::run_script(server.port(), step);
  const auto sa = a.of_type("state"), sb = b.of_type("state");
  bool same = sa.size() == sb.size();
  for (std::size_t k = 0; same && k < sa.size(); ++k) same = sa[k].dump() == sb[k].dump();
  same = same && a.of_type("result").size() == 1 && b.of_type("result").size() == 1 &&
         a.of_type("result")[0].dump() == b.of_type("result")[0].dump();
  return {flood_steps == 200 && f.poses_sent >= 15000 && !f.timed_out && sa.size() == 200 && same,
          "1 kHz flood: " + std::to_string(f.poses_sent) + " poses -> " + std::to_string(flood_steps) +
              " steps; identical traces: " + std::to_string(sa.size()) + "/" + std::to_string(sb.size()) +
              " steps, streams " + (same ? "identical" : "differ")};
}

}  // namespace

int main() {
  std::printf("acceptance criteria (thresholds fixed in this binary)\n");
  criterion("retargeting oracle", 1.0, retargeting_oracle);
  criterion("split_yaw", 0, split_yaw_exact);
  criterion("IK suite", 30.0, ik_suite);
  {
    const IkTally a = ik_round_trip(RobotProfile::armA, 500, 7);
    info("IK round trip armA", std::to_string(a.ok) + "/500 = " + fmt("%.1f%%", a.ok / 5.0) +
                                   " (not a criterion; armB is the reference profile)");
  }
  criterion("environment suite", 60.0, environment_suite);
  criterion("PPO gradient check", 10.0, ppo_gradient_check);
  criterion("desk-scale learning", 1800.0, desk_scale_learning);
  criterion("revised vs original", 0, revised_vs_original);
  criterion("Wilcoxon", 10.0, wilcoxon);
  criterion("biomechanics KS", 0, biomech_ks);
  criterion("replay integrity", 0, replay_integrity);
  criterion("live-server timing", 0, live_timing);
  std::printf("%d failed\n", failures);
  return failures;
}
