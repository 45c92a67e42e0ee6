#pragma once

// EpisodeRecord JSONL: one header line, one line per step, one footer line.
//
//   {"kind":"header","schema_version":1,"config_hash":..,"seed":..,"task":..,
//    "robot_profile":..,"policy_id":..,"biomech":..,"human_source":..,
//    "human":{...}}                        // live records: initial avatar
//   {"kind":"step","t":0,"obs":[..],"action":[7],"reward":..,"force":..,
//    "events":{"captured":0,"spilled":0,"scratches":0,"wiped":0},
//    "human_q":[20]}                       // live records only
//   {"kind":"footer","cumulative_reward":..,"success":..,"digest":"<hex>"}
//
// `obs` is the observation the policy saw before acting; `action` holds the
// joint increments actually commanded (radians). The digest is FNV-1a over
// the compact dump of every other field, so edits anywhere are detected.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "avr/envs/serialize.hpp"

namespace avr::eval {

inline constexpr int kRecordSchemaVersion = 1;

class ConfigHashMismatch : public Error {
 public:
  ConfigHashMismatch(const std::string& recorded, const std::string& installed)
      : Error("ConfigHashMismatch", "record config hash " + recorded + " != installed " + installed) {}
};

struct EpisodeHeader {
  std::string config_hash;
  std::uint64_t seed = 0;
  Task task = Task::feeding;
  RobotProfile profile = RobotProfile::armA;
  std::string policy_id;
  human::BiomechMode biomech = human::BiomechMode::fixed;
  envs::HumanSource source = envs::HumanSource::static_sampled;
  std::optional<human::HumanState> initial_human;  // live records
};

struct StepRow {
  int t = 0;
  std::vector<double> obs;
  std::array<double, robot::kRobotDof> action{};
  double reward = 0.0;
  double force = 0.0;
  envs::StepEvents events;
  std::optional<std::array<double, human::kHumanDof>> human_q;
};

struct EpisodeFooter {
  double cumulative_reward = 0.0;
  bool success = false;
  std::string digest;
};

struct EpisodeRecord {
  EpisodeHeader header;
  std::vector<StepRow> rows;
  EpisodeFooter footer;
};

inline const char* to_string(envs::HumanSource s) { return s == envs::HumanSource::live ? "live" : "static"; }

inline envs::HumanSource human_source_from_string(const std::string& s) {
  if (s == "live") return envs::HumanSource::live;
  if (s == "static") return envs::HumanSource::static_sampled;
  throw SchemaError("unknown human_source '" + s + "'");
}

inline nlohmann::json header_json(const EpisodeHeader& h) {
  nlohmann::json j{{"kind", "header"},
                   {"schema_version", kRecordSchemaVersion},
                   {"config_hash", h.config_hash},
                   {"seed", h.seed},
                   {"task", to_string(h.task)},
                   {"robot_profile", to_string(h.profile)},
                   {"policy_id", h.policy_id},
                   {"biomech", human::to_string(h.biomech)},
                   {"human_source", to_string(h.source)}};
  if (h.initial_human) j["human"] = envs::human_to_json(*h.initial_human);
  return j;
}

inline nlohmann::json row_json(const StepRow& r) {
  nlohmann::json j{{"kind", "step"},
                   {"t", r.t},
                   {"obs", r.obs},
                   {"action", r.action},
                   {"reward", r.reward},
                   {"force", r.force},
                   {"events",
                    {{"captured", r.events.captured},
                     {"spilled", r.events.spilled},
                     {"scratches", r.events.scratches},
                     {"wiped", r.events.wiped}}}};
  if (r.human_q) j["human_q"] = *r.human_q;
  return j;
}

inline nlohmann::json footer_json(const EpisodeFooter& f, bool with_digest) {
  nlohmann::json j{{"kind", "footer"}, {"cumulative_reward", f.cumulative_reward}, {"success", f.success}};
  if (with_digest) j["digest"] = f.digest;
  return j;
}

inline std::string compute_digest(const EpisodeRecord& r) {
  std::uint64_t h = fnv1a64(header_json(r.header).dump());
  for (const StepRow& row : r.rows) h = fnv1a64(row_json(row).dump(), h);
  h = fnv1a64(footer_json(r.footer, false).dump(), h);
  return hex64(h);
}

inline void seal(EpisodeRecord& r) { r.footer.digest = compute_digest(r); }

inline void write_record(std::ostream& os, const EpisodeRecord& r) {
  os << header_json(r.header).dump() << "\n";
  for (const StepRow& row : r.rows) os << row_json(row).dump() << "\n";
  os << footer_json(r.footer, true).dump() << "\n";
}

inline void save_record(const EpisodeRecord& r, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("IoError", "cannot write " + path.string());
  write_record(os, r);
}

namespace record_detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key, int line) {
  if (!j.contains(key)) throw SchemaError("line " + std::to_string(line) + ": missing '" + key + "'");
  return j.at(key);
}

}  // namespace record_detail

/// Parses one record. Schema problems raise SchemaError with the line number.
inline EpisodeRecord read_record(std::istream& is) {
  using record_detail::field;
  EpisodeRecord r;
  std::string line;
  int n = 0;
  bool have_header = false;
  bool have_footer = false;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    if (have_footer) throw SchemaError("line " + std::to_string(n) + ": content after footer");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const std::string kind = field(j, "kind", n).get<std::string>();
      if (kind == "header") {
        if (have_header) throw SchemaError("line " + std::to_string(n) + ": duplicate header");
        if (field(j, "schema_version", n).get<int>() != kRecordSchemaVersion) {
          throw SchemaError("unsupported record schema_version");
        }
        EpisodeHeader& h = r.header;
        h.config_hash = field(j, "config_hash", n).get<std::string>();
        h.seed = field(j, "seed", n).get<std::uint64_t>();
        h.task = task_from_string(field(j, "task", n).get<std::string>());
        h.profile = profile_from_string(field(j, "robot_profile", n).get<std::string>());
        h.policy_id = field(j, "policy_id", n).get<std::string>();
        h.biomech = human::biomech_mode_from_string(field(j, "biomech", n).get<std::string>());
        h.source = human_source_from_string(field(j, "human_source", n).get<std::string>());
        if (j.contains("human")) h.initial_human = envs::human_from_json(j.at("human"));
        have_header = true;
      } else if (kind == "step") {
        if (!have_header) throw SchemaError("line " + std::to_string(n) + ": step before header");
        StepRow row;
        row.t = field(j, "t", n).get<int>();
        row.obs = field(j, "obs", n).get<std::vector<double>>();
        const auto a = field(j, "action", n).get<std::vector<double>>();
        if (a.size() != robot::kRobotDof) throw DimensionMismatch(robot::kRobotDof, a.size());
        std::copy(a.begin(), a.end(), row.action.begin());
        row.reward = field(j, "reward", n).get<double>();
        row.force = field(j, "force", n).get<double>();
        const auto& ev = field(j, "events", n);
        row.events.captured = field(ev, "captured", n).get<int>();
        row.events.spilled = field(ev, "spilled", n).get<int>();
        row.events.scratches = field(ev, "scratches", n).get<int>();
        row.events.wiped = field(ev, "wiped", n).get<int>();
        if (j.contains("human_q")) {
          const auto q = j.at("human_q").get<std::vector<double>>();
          if (q.size() != human::kHumanDof) throw DimensionMismatch(human::kHumanDof, q.size());
          std::array<double, human::kHumanDof> hq{};
          std::copy(q.begin(), q.end(), hq.begin());
          row.human_q = hq;
        }
        r.rows.push_back(std::move(row));
      } else if (kind == "footer") {
        if (!have_header) throw SchemaError("line " + std::to_string(n) + ": footer before header");
        r.footer.cumulative_reward = field(j, "cumulative_reward", n).get<double>();
        r.footer.success = field(j, "success", n).get<bool>();
        r.footer.digest = field(j, "digest", n).get<std::string>();
        have_footer = true;
      } else {
        throw SchemaError("line " + std::to_string(n) + ": unknown kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  if (!have_header || !have_footer) throw SchemaError("record needs a header and a footer");
  return r;
}

inline EpisodeRecord load_record(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("IoError", "cannot open " + path.string());
  return read_record(is);
}

/// Structural invariants: row count, contiguous t, footer sum.
inline void validate_record(const EpisodeRecord& r, int steps) {
  if (static_cast<int>(r.rows.size()) != steps) {
    throw SchemaError("record has " + std::to_string(r.rows.size()) + " rows, expected " + std::to_string(steps));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (r.rows[i].t != static_cast<int>(i)) throw SchemaError("row " + std::to_string(i) + " has t out of order");
    if (r.rows[i].obs.size() != envs::observation_size(r.header.task)) {
      throw SchemaError("row " + std::to_string(i) + " observation length mismatch");
    }
    if (r.header.source == envs::HumanSource::live && !r.rows[i].human_q) {
      throw SchemaError("live record row " + std::to_string(i) + " lacks human_q");
    }
    sum += r.rows[i].reward;
  }
  if (std::abs(sum - r.footer.cumulative_reward) > 1e-9 * std::max(1.0, std::abs(sum))) {
    throw SchemaError("footer cumulative_reward does not equal the sum of row rewards");
  }
}

}  // namespace avr::eval
