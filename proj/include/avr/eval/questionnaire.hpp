#pragma once

// Post-trial questionnaire: four 7-point Likert statements, 1 = strongly
// disagree, 7 = strongly agree. Stored one JSON object per line.

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "avr/core/errors.hpp"

namespace avr::eval {

inline constexpr std::size_t kLikertItems = 4;

struct QuestionnaireRecord {
  std::string session_id;
  std::string trial_id;
  std::array<int, kLikertItems> responses{};  // L1..L4

  void validate() const {
    for (std::size_t i = 0; i < kLikertItems; ++i) {
      if (responses[i] < 1 || responses[i] > 7) {
        throw ValidationError("L" + std::to_string(i + 1) + " must be an integer in 1..7");
      }
    }
  }
  bool operator==(const QuestionnaireRecord&) const = default;
};

inline nlohmann::json to_json(const QuestionnaireRecord& q) {
  return {{"session_id", q.session_id},
          {"trial_id", q.trial_id},
          {"L1", q.responses[0]},
          {"L2", q.responses[1]},
          {"L3", q.responses[2]},
          {"L4", q.responses[3]}};
}

/// Accepts {"L1":..,"L4":..} with integer values only.
inline std::array<int, kLikertItems> likert_from_json(const nlohmann::json& j) {
  std::array<int, kLikertItems> r{};
  for (std::size_t i = 0; i < kLikertItems; ++i) {
    const std::string key = "L" + std::to_string(i + 1);
    if (!j.contains(key) || !j.at(key).is_number_integer()) {
      throw SchemaError("questionnaire field " + key + " must be an integer");
    }
    r[i] = j.at(key).get<int>();
  }
  return r;
}

inline QuestionnaireRecord questionnaire_from_json(const nlohmann::json& j) {
  QuestionnaireRecord q;
  try {
    q.session_id = j.at("session_id").get<std::string>();
    q.trial_id = j.at("trial_id").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("questionnaire: ") + e.what());
  }
  q.responses = likert_from_json(j);
  q.validate();
  return q;
}

inline void append_questionnaire(const QuestionnaireRecord& q, const std::filesystem::path& path) {
  q.validate();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::app);
  if (!os) throw Error("IoError", "cannot write " + path.string());
  os << to_json(q).dump() << "\n";
}

inline std::vector<QuestionnaireRecord> load_questionnaires(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("IoError", "cannot open " + path.string());
  std::vector<QuestionnaireRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(questionnaire_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(std::string("questionnaire: ") + e.what());
    }
  }
  return out;
}

}  // namespace avr::eval
