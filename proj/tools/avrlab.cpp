// avrlab: train, evaluate, replay, analyze, tabulate and serve.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 validation/schema error,
// 3 replay divergence or config mismatch.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>

#include "avr/eval/evaluate.hpp"
#include "avr/eval/stats.hpp"
#include "avr/live/server.hpp"

namespace {

using namespace avr;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

envs::EnvConfig load_config(const std::string& path) {
  return path.empty() ? envs::default_env_config() : envs::load_env_config(path);
}

int cmd_train(const std::string& config, learn::TrainConfig tc, const std::string& task, const std::string& robot,
              const std::string& biomech, const std::string& out, const std::string& curve) {
  tc.task = task_from_string(task);
  tc.profile = profile_from_string(robot);
  tc.biomech = human::biomech_mode_from_string(biomech);
  const envs::EnvConfig cfg = load_config(config);
  std::ofstream curve_os;
  if (!curve.empty()) {
    curve_os.open(curve);
    if (!curve_os) throw Error("IoError", "cannot write " + curve);
  }
  const learn::TrainResult res = learn::train(tc, cfg, [&](const learn::IterationStats& s, const learn::PolicyNet&) {
    std::fprintf(stderr, "iter %3d  rollouts %4d  mean reward %9.3f  success %.2f  kl %.4f\n", s.iteration,
                 s.rollouts, s.mean_reward, s.success_rate, s.loss.approx_kl);
    if (curve_os) curve_os << learn::to_json(s).dump() << "\n";
  });
  learn::save_policy(res.net, out);
  std::printf("wrote %s (task %s, train config %s)\n", out.c_str(), to_string(tc.task), tc.hash().c_str());
  return kExitOk;
}

int cmd_eval(const std::string& config, const std::string& policy_path, const std::string& robot,
             const std::string& biomech, int episodes, std::uint64_t seed, int workers, const std::string& report,
             const std::string& records, std::string id) {
  const envs::EnvConfig cfg = load_config(config);
  const learn::PolicyNet net = learn::load_policy(policy_path);
  if (id.empty()) id = fs::path(policy_path).stem().string();
  const eval::EvaluationResult res =
      eval::evaluate(net, cfg, net.task, profile_from_string(robot), episodes, seed,
                     human::biomech_mode_from_string(biomech), workers, id);
  if (!report.empty()) eval::save_metrics_csv({res.metrics}, report);
  if (!records.empty()) {
    for (std::size_t i = 0; i < res.records.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "episode_%04zu.jsonl", i);
      eval::save_record(res.records[i], fs::path(records) / name);
    }
  }
  eval::write_metrics_csv(std::cout, {res.metrics});
  return kExitOk;
}

int cmd_replay(const std::string& config, const std::vector<std::string>& files) {
  const envs::EnvConfig cfg = load_config(config);
  int rc = kExitOk;
  for (const std::string& f : files) {
    // Replay before validating so a tampered row is reported by step.
    const eval::EpisodeRecord rec = eval::load_record(f);
    const eval::ReplayReport rep = eval::replay(rec, cfg);
    if (rep.clean) {
      std::printf("%s: clean (%zu steps)\n", f.c_str(), rec.rows.size());
    } else {
      std::printf("%s: DIVERGED at step %d field %s %s\n", f.c_str(), rep.divergence_step, rep.field.c_str(),
                  rep.detail.c_str());
      rc = kExitDivergence;
    }
  }
  return rc;
}

std::vector<double> column(const std::string& path, const std::string& col) {
  std::ifstream is(path);
  if (!is) throw Error("IoError", "cannot open " + path);
  return eval::csv_numeric_column(eval::read_csv(is), col);
}

int cmd_analyze(const std::string& a_path, const std::string& b_path, std::string col_a, std::string col_b,
                const std::string& paired_col, std::optional<double> constant, bool one_sided,
                const std::string& alternative) {
  if (!paired_col.empty()) {
    if (col_a.empty()) col_a = paired_col;
    if (col_b.empty()) col_b = paired_col;
  }
  if (col_a.empty()) throw ValidationError("name the column to compare with --paired-col or --col-a");
  eval::Alternative alt = eval::Alternative::two_sided;
  if (one_sided || alternative == "greater") alt = eval::Alternative::greater;
  if (alternative == "less") alt = eval::Alternative::less;
  if (!alternative.empty() && alternative != "two-sided" && alternative != "greater" && alternative != "less") {
    throw ValidationError("--alternative must be two-sided, greater or less");
  }

  const std::vector<double> a = column(a_path, col_a);
  std::vector<double> b;
  std::string against;
  if (constant) {
    if (!b_path.empty()) throw ValidationError("use either --b or --constant, not both");
    b.assign(a.size(), *constant);
    against = "constant " + eval::format_double(*constant);
  } else {
    if (b_path.empty()) throw ValidationError("--b or --constant is required");
    if (col_b.empty()) throw ValidationError("name the column of --b with --paired-col or --col-b");
    b = column(b_path, col_b);
    against = b_path + ":" + col_b;
  }
  const eval::WilcoxonResult r = eval::wilcoxon_signed_rank(a, b, alt);
  const char* alt_name = alt == eval::Alternative::two_sided ? "two-sided" : alt == eval::Alternative::greater ? "greater" : "less";
  std::printf("a: %s:%s  b: %s\n", a_path.c_str(), col_a.c_str(), against.c_str());
  std::printf("n=%zu  W=%g  W+=%g  W-=%g  p(%s)=%.6g  method=%s%s\n", r.n, r.W, r.w_plus, r.w_minus, alt_name, r.p,
              eval::to_string(r.method), r.all_zero ? "  [all differences zero]" : "");
  return kExitOk;
}

int cmd_table(const std::string& in, const std::string& layout, const std::string& out) {
  std::vector<eval::MetricsRow> rows;
  std::vector<fs::path> files;
  if (fs::is_directory(in)) {
    for (const auto& e : fs::directory_iterator(in)) {
      if (e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(in);
  }
  for (const fs::path& f : files) {
    const auto r = eval::load_metrics_csv(f);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  const eval::Table t = eval::make_table(rows, eval::table_layout_from_string(layout));
  std::cout << t.text();
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw Error("IoError", "cannot write " + out);
    os << t.csv();
  }
  return kExitOk;
}

live::net::io_context* g_ioc = nullptr;

int cmd_serve(const std::string& config, unsigned short port, const std::string& policies, const std::string& record,
              const std::string& static_root, std::uint64_t seed, bool stochastic) {
  auto so = std::make_shared<live::SessionOptions>();
  so->env = load_config(config);
  so->policies = live::load_policy_dir(policies);
  so->record_dir = record;
  so->seed = seed;
  so->stochastic = stochastic;
  live::ServerOptions opts;
  opts.session = so;
  opts.static_root = static_root;
  opts.log = [](const std::string& m) { std::fprintf(stderr, "%s\n", m.c_str()); };

  live::net::io_context ioc(1);
  live::Server server(ioc, port, opts);
  server.start();
  g_ioc = &ioc;
  std::signal(SIGINT, [](int) {
    if (g_ioc) g_ioc->stop();
  });
  std::printf("listening on port %u (%zu policies; websocket /session)\n", server.port(), so->policies.size());
  std::fflush(stdout);
  ioc.run();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Assistive-robot simulation, training and evaluation toolkit"};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "environment TOML (default: built-in)");

  learn::TrainConfig tc;
  std::string task = "feeding", robot = "armA", biomech = "fixed", out = "policy.json", curve, ckpt;
  auto* train = app.add_subcommand("train", "train a PPO policy");
  train->add_option("--task", task)->required();
  train->add_option("--robot", robot)->required();
  train->add_option("--biomech", biomech, "fixed|randomized");
  train->add_option("--rollouts", tc.total_rollouts, "total rollouts")->capture_default_str();
  train->add_option("--per-iteration", tc.rollouts_per_iteration)->capture_default_str();
  train->add_option("--seed", tc.seed)->capture_default_str();
  train->add_option("--workers", tc.workers)->capture_default_str();
  train->add_option("--lr", tc.learning_rate)->capture_default_str();
  train->add_option("--checkpoints", ckpt, "directory for periodic checkpoints");
  train->add_option("--curve", curve, "write per-iteration stats as JSONL");
  train->add_option("-o,--output", out)->capture_default_str();

  std::string policy, report, records, id, eval_biomech = "fixed";
  int episodes = 100, workers = 1;
  std::uint64_t seed = 1;
  auto* ev = app.add_subcommand("eval", "evaluate a policy on sampled humans");
  ev->add_option("--policy", policy)->required();
  ev->add_option("--robot", robot)->capture_default_str();
  ev->add_option("--biomech", eval_biomech, "population: fixed|randomized")->capture_default_str();
  ev->add_option("--episodes", episodes)->capture_default_str();
  ev->add_option("--seed", seed)->capture_default_str();
  ev->add_option("--workers", workers)->capture_default_str();
  ev->add_option("--report", report, "metrics CSV");
  ev->add_option("--records", records, "directory for per-episode JSONL");
  ev->add_option("--id", id, "policy id (default: file stem)");

  std::vector<std::string> replay_files;
  auto* rp = app.add_subcommand("replay", "re-simulate episode records and compare");
  rp->add_option("files", replay_files)->required();

  std::string a_path, b_path, col_a, col_b, paired_col, alternative;
  std::optional<double> constant;
  bool one_sided = false;
  auto* an = app.add_subcommand("analyze", "Wilcoxon signed-rank test on paired CSV columns");
  an->add_option("--a", a_path)->required();
  an->add_option("--b", b_path);
  an->add_option("--paired-col", paired_col, "column used from both files");
  an->add_option("--col-a", col_a);
  an->add_option("--col-b", col_b);
  an->add_option("--constant", constant, "compare --a against a constant (e.g. neutral 4)");
  an->add_flag("--one-sided", one_sided, "test a > b");
  an->add_option("--alternative", alternative, "two-sided|greater|less");

  std::string in, layout = "original-vs-revised", table_out;
  auto* tb = app.add_subcommand("table", "aggregate metrics CSVs into a results table");
  tb->add_option("--in", in, "directory of metrics CSVs (or one file)")->required();
  tb->add_option("--layout", layout)->capture_default_str();
  tb->add_option("-o,--output", table_out, "also write the table as CSV");

  unsigned short port = 8080;
  std::string policies, record_dir, static_root;
  bool stochastic = false;
  auto* sv = app.add_subcommand("serve", "host live sessions over WebSocket");
  sv->add_option("--port", port)->capture_default_str();
  sv->add_option("--policies", policies, "directory of policy JSON files")->required();
  sv->add_option("--record", record_dir, "directory for episode and questionnaire records")->required();
  sv->add_option("--static", static_root, "UI bundle served at /");
  sv->add_option("--seed", seed)->capture_default_str();
  sv->add_flag("--stochastic", stochastic, "sample actions instead of using the mean");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*train) {
      tc.checkpoint_dir = ckpt;
      return cmd_train(config, tc, task, robot, biomech, out, curve);
    }
    if (*ev) return cmd_eval(config, policy, robot, eval_biomech, episodes, seed, workers, report, records, id);
    if (*rp) return cmd_replay(config, replay_files);
    if (*an) return cmd_analyze(a_path, b_path, col_a, col_b, paired_col, constant, one_sided, alternative);
    if (*tb) return cmd_table(in, layout, table_out);
    if (*sv) return cmd_serve(config, port, policies, record_dir, static_root, seed, stochastic);
  } catch (const eval::ConfigHashMismatch& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDivergence;
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
    return e.code() == "IoError" ? 1 : kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
