#include <gtest/gtest.h>

#include <fstream>

#include "avr/learn/train.hpp"
#include "support/live_client.hpp"

using namespace avr;
using namespace avr::live;
using nlohmann::json;

namespace {

std::shared_ptr<SessionOptions> options(const std::filesystem::path& record_dir = {}) {
  auto so = std::make_shared<SessionOptions>();
  for (Task t : kAllTasks) {
    learn::TrainConfig tc;
    tc.task = t;
    tc.seed = 3;
    auto net = std::make_shared<learn::PolicyNet>(learn::initial_policy(tc, envs::observation_size(t)));
    so->policies[std::string(to_string(t))] = net;
  }
  so->record_dir = record_dir;
  return so;
}

json msg(const std::string& type, json body = json::object(), const std::string& sid = "s1") {
  body["type"] = type;
  body["sid"] = sid;
  return body;
}

json start_body(Task t, RobotProfile p = RobotProfile::armA, bool practice = false) {
  return {{"task", to_string(t)}, {"robot", to_string(p)}, {"policy", to_string(t)}, {"practice", practice}};
}

std::vector<json> only(const std::vector<json>& ms, const std::string& type) {
  std::vector<json> out;
  for (const json& m : ms) {
    if (m.value("type", "") == type) out.push_back(m);
  }
  return out;
}

std::vector<json> tick_all(Session& s, std::vector<json>& log) {
  std::vector<json> out = s.tick();
  log.insert(log.end(), out.begin(), out.end());
  return out;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("avr_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Runs a full trial, feeding `per_tick` poses between ticks.
std::vector<json> flooded_trial(const std::shared_ptr<const SessionOptions>& so, Task task, int per_tick) {
  Session s("s1", so);
  const auto trace = live_client::make_trace(task, 400, 0.1);
  std::vector<json> log;
  s.enqueue(msg("start", start_body(task)).dump());
  long sent = 0;
  for (int tick = 0; tick < 260 && s.phase() != Phase::questionnaire; ++tick) {
    for (int i = 0; i < per_tick; ++i, ++sent) {
      human::TrackedInput in = trace[static_cast<std::size_t>(sent) % trace.size()];
      in.t = 1e-3 * static_cast<double>(sent);
      s.enqueue(live_client::pose_message("s1", in).dump());
    }
    tick_all(s, log);
  }
  return log;
}

}  // namespace

TEST(Session, FloodedInputStillGivesExactly200Steps) {
  const auto so = options();
  for (Task task : kAllTasks) {
    const std::vector<json> log = flooded_trial(so, task, 100);
    const std::vector<json> states = only(log, "state");
    ASSERT_EQ(states.size(), 200u) << to_string(task);
    for (std::size_t k = 0; k < states.size(); ++k) EXPECT_EQ(states[k]["t"], k + 1);
    const std::vector<json> results = only(log, "result");
    ASSERT_EQ(results.size(), 1u);
    EXPECT_EQ(results[0]["steps"], 200);
    EXPECT_TRUE(only(log, "error").empty());
  }
}

TEST(Session, IdenticalInputGivesIdenticalStream) {
  const auto so = options();
  const std::vector<json> a = flooded_trial(so, Task::drinking, 7);
  const std::vector<json> b = flooded_trial(so, Task::drinking, 7);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].dump(), b[i].dump()) << "message " << i;
  // Input does reach the avatar: a different pose stream changes the state.
  const std::vector<json> c = flooded_trial(so, Task::drinking, 3);
  EXPECT_NE(only(a, "state").back()["human_q"], only(c, "state").back()["human_q"]);
}

TEST(Session, HelloReportsPoliciesAndAvatar) {
  Session s("s1", options());
  s.enqueue(msg("hello").dump());
  const std::vector<json> out = s.tick();
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0]["type"], "config");
  EXPECT_EQ(out[0]["version"], kProtocolVersion);
  EXPECT_EQ(out[0]["steps"], 200);
  EXPECT_EQ(out[0]["policies"].size(), 4u);
  EXPECT_TRUE(out[0]["avatar"].contains("bathing"));
}

TEST(Session, RejectsUnknownPolicyAndMismatchedTask) {
  Session s("s1", options());
  s.enqueue(msg("start", {{"task", "feeding"}, {"robot", "armA"}, {"policy", "nope"}}).dump());
  s.enqueue(msg("start", {{"task", "bathing"}, {"robot", "armA"}, {"policy", "feeding"}}).dump());
  s.enqueue(msg("start", {{"task", "cooking"}, {"robot", "armA"}, {"policy", "feeding"}}).dump());
  const std::vector<json> out = s.tick();
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0]["code"], "UnknownPolicy");
  EXPECT_EQ(out[1]["code"], "ObsDimMismatch");
  EXPECT_EQ(out[2]["type"], "error");
  EXPECT_EQ(s.phase(), Phase::lobby);
}

TEST(Session, BadMessagesAreSchemaErrors) {
  Session s("s1", options());
  s.enqueue("{not json");
  s.enqueue(json{{"type", "hello"}}.dump());
  s.enqueue(msg("hello", json::object(), "other").dump());
  s.enqueue(msg("dance").dump());
  s.enqueue(msg("start", start_body(Task::feeding)).dump());
  s.enqueue(msg("pose", {{"t", 0.0}}).dump());
  const std::vector<json> out = s.tick();
  ASSERT_EQ(out.size(), 6u);  // five errors then the first state
  for (int i = 0; i < 5; ++i) EXPECT_EQ(out[static_cast<std::size_t>(i)]["code"], "BadSchema") << i;
  EXPECT_EQ(out[5]["type"], "state");
}

TEST(Session, NonMonotonePoseKeepsPriorInput) {
  Session s("s1", options());
  const auto trace = live_client::make_trace(Task::feeding, 3, 0.1);
  s.enqueue(msg("start", start_body(Task::feeding)).dump());
  s.enqueue(live_client::pose_message("s1", trace[1]).dump());
  s.enqueue(live_client::pose_message("s1", trace[0]).dump());  // older
  s.enqueue(live_client::pose_message("s1", trace[1]).dump());  // equal
  const std::vector<json> out = s.tick();
  const std::vector<json> errors = only(out, "error");
  ASSERT_EQ(errors.size(), 2u);
  EXPECT_EQ(errors[0]["code"], "NonMonotoneTimestamp");
  EXPECT_EQ(s.rejected_poses(), 2);
  EXPECT_EQ(only(out, "state")[0]["input_age"], 0);
  std::vector<json> log;
  EXPECT_EQ(only(tick_all(s, log), "state")[0]["input_age"], 1);
}

TEST(Session, PhasesOnlyMoveForward) {
  const auto so = options();
  Session s("s1", so);
  s.enqueue(msg("questionnaire", {{"L1", 7}, {"L2", 6}, {"L3", 6}, {"L4", 5}}).dump());
  s.enqueue(msg("start", start_body(Task::scratching, RobotProfile::armB, true)).dump());
  std::vector<json> out = s.tick();
  EXPECT_EQ(out[0]["code"], "OutOfPhase");
  EXPECT_EQ(s.phase(), Phase::practice);
  // Cannot restart practice while it runs.
  s.enqueue(msg("start", start_body(Task::scratching, RobotProfile::armB, true)).dump());
  out = s.tick();
  EXPECT_EQ(only(out, "error")[0]["code"], "OutOfPhase");
  std::vector<json> log;
  while (only(log, "result").empty()) tick_all(s, log);
  EXPECT_EQ(only(log, "result")[0]["practice"], true);
  EXPECT_TRUE(s.records().empty());
  EXPECT_EQ(s.phase(), Phase::practice);
  // A finished practice can be repeated, then the trial follows.
  s.enqueue(msg("start", start_body(Task::scratching, RobotProfile::armB, true)).dump());
  log.clear();
  while (only(log, "result").empty()) tick_all(s, log);
  s.enqueue(msg("start", start_body(Task::scratching, RobotProfile::armB)).dump());
  out = s.tick();
  EXPECT_EQ(s.phase(), Phase::trial);
  EXPECT_EQ(only(out, "state")[0]["t"], 1);
  s.enqueue(msg("start", start_body(Task::scratching, RobotProfile::armB, true)).dump());
  EXPECT_EQ(only(s.tick(), "error")[0]["code"], "OutOfPhase");
}

TEST(Session, QuestionnaireCompletesAndPersists) {
  const auto dir = temp_dir("live_persist");
  const auto so = options(dir);
  Session s("p7", so);
  std::vector<json> log;
  s.enqueue(msg("start", start_body(Task::bathing, RobotProfile::armB), "p7").dump());
  while (s.phase() != Phase::questionnaire) tick_all(s, log);
  const json result = only(log, "result").at(0);
  EXPECT_EQ(result["trial_id"], "p7-trial");
  s.enqueue(msg("pose", {{"t", 1.0}}, "p7").dump());
  s.enqueue(msg("questionnaire", {{"L1", 9}, {"L2", 6}, {"L3", 6}, {"L4", 5}}, "p7").dump());
  s.enqueue(msg("questionnaire", {{"L1", 7}, {"L2", 6}, {"L3", 6}, {"L4", 5}}, "p7").dump());
  const std::vector<json> out = s.tick();
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0]["code"], "OutOfPhase");
  EXPECT_EQ(out[1]["code"], "ValidationError");
  EXPECT_EQ(s.phase(), Phase::done);
  EXPECT_THROW(s.tick(), SessionExpired);

  const auto qs = eval::load_questionnaires(dir / "questionnaires.jsonl");
  ASSERT_EQ(qs.size(), 1u);
  EXPECT_EQ(qs[0].responses, (std::array<int, 4>{7, 6, 6, 5}));
  EXPECT_EQ(qs[0].trial_id, "p7-trial");
  const eval::EpisodeRecord rec = eval::load_record(dir / "p7-trial.jsonl");
  EXPECT_EQ(rec.header.source, envs::HumanSource::live);
  EXPECT_EQ(rec.rows.size(), 200u);
  const eval::ReplayReport rep = eval::replay(rec, so->env);
  EXPECT_TRUE(rep.clean) << rep.field << " " << rep.detail;
  std::filesystem::remove_all(dir);
}

TEST(Session, StopEndsSessionWithoutRecord) {
  const auto dir = temp_dir("live_stop");
  Session s("s1", options(dir));
  s.enqueue(msg("start", start_body(Task::feeding)).dump());
  for (int i = 0; i < 20; ++i) s.tick();
  s.enqueue(msg("stop").dump());
  EXPECT_TRUE(only(s.tick(), "state").empty());
  EXPECT_EQ(s.phase(), Phase::done);
  EXPECT_TRUE(s.records().empty());
  EXPECT_FALSE(std::filesystem::exists(dir / "s1-trial.jsonl"));
  std::filesystem::remove_all(dir);
}

TEST(Server, LockStepClientMatchesInProcessSession) {
  const auto so = options();
  live_client::ServerThread server(so, std::chrono::milliseconds(100));
  live_client::Script script;
  script.sid = "net1";
  script.start = start_body(Task::feeding);
  script.trace = live_client::make_trace(Task::feeding, 200, 0.1);
  const live_client::Outcome a = live_client::run_script(server.port(), script);
  const live_client::Outcome b = live_client::run_script(server.port(), script);
  ASSERT_FALSE(a.timed_out);
  EXPECT_TRUE(a.server_closed);
  const std::vector<json> sa = a.of_type("state"), sb = b.of_type("state");
  ASSERT_EQ(sa.size(), 200u);
  ASSERT_EQ(sb.size(), 200u);
  const std::vector<json> local = only(live_client::run_in_process(so, script), "state");
  ASSERT_EQ(local.size(), 200u);
  for (std::size_t k = 0; k < 200; ++k) {
    ASSERT_EQ(sa[k].dump(), sb[k].dump()) << "step " << k;
    ASSERT_EQ(sa[k].dump(), local[k].dump()) << "step " << k;
  }
  EXPECT_TRUE(a.of_type("error").empty());
}

TEST(Server, FloodingClientStillGets200Steps) {
  const auto so = options();
  live_client::ServerThread server(so, std::chrono::milliseconds(10));
  live_client::Script script;
  script.sid = "flood";
  script.start = start_body(Task::scratching, RobotProfile::armB);
  script.trace = live_client::make_trace(Task::scratching, 50, 0.1);
  script.flood_period = std::chrono::microseconds(500);
  const live_client::Outcome o = live_client::run_script(server.port(), script);
  ASSERT_FALSE(o.timed_out);
  const std::vector<json> states = o.of_type("state");
  ASSERT_EQ(states.size(), 200u);
  EXPECT_EQ(states.back()["t"], 200);
  EXPECT_EQ(o.of_type("result").size(), 1u);
  EXPECT_GT(o.poses_sent, 1000);
}

TEST(Server, ServesStaticFilesAndRejectsOtherSocketPaths) {
  const auto dir = temp_dir("static");
  std::ofstream(dir / "index.html") << "<html>ok</html>";
  live_client::ServerThread server(options(), std::chrono::milliseconds(100), dir);

  namespace http = boost::beast::http;
  live_client::net::io_context ioc;
  boost::beast::tcp_stream stream(ioc);
  stream.connect(live_client::tcp::endpoint(live_client::net::ip::make_address("127.0.0.1"), server.port()));
  http::request<http::empty_body> req(http::verb::get, "/", 11);
  req.set(http::field::host, "127.0.0.1");
  http::write(stream, req);
  boost::beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(stream, buf, res);
  EXPECT_EQ(res.result(), http::status::ok);
  EXPECT_EQ(res.body(), "<html>ok</html>");
  EXPECT_EQ(res[http::field::content_type], "text/html");

  live_client::websocket::stream<boost::beast::tcp_stream> ws(ioc);
  boost::beast::get_lowest_layer(ws).connect(
      live_client::tcp::endpoint(live_client::net::ip::make_address("127.0.0.1"), server.port()));
  boost::beast::error_code ec;
  ws.handshake("127.0.0.1", "/elsewhere", ec);
  EXPECT_TRUE(ec);
  std::filesystem::remove_all(dir);
}
