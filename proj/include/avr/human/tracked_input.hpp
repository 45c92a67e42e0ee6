#pragma once

// Tracked headset/controller input and its JSON Lines trace format:
//
//   {"t": 0.1, "head": {"p": [x, y, z], "q": [qx, qy, qz, qw]},
//    "left": {...}, "right": {...}}
//
// Positions are world-frame meters; quaternions are (x, y, z, w) and must be
// unit length (1e-6). Timestamps must be strictly increasing within a trace.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "avr/core/errors.hpp"
#include "avr/core/pose.hpp"

namespace avr::human {

/// Tracking frames report yaw relative to the body +y axis.
inline constexpr double kTrackingYawOffset = kPi / 2.0;
inline constexpr double kInputQuatTolerance = 1e-6;

struct TrackedInput {
  Pose6 head;
  Pose6 left;
  Pose6 right;
  double t = 0.0;
};

inline nlohmann::json pose_to_json(const Pose6& p) {
  const Quat& q = p.orientation;
  return {{"p", {p.position.x(), p.position.y(), p.position.z()}},
          {"q", {q.x(), q.y(), q.z(), q.w()}}};
}

inline Pose6 pose_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("p") || !j.contains("q")) {
    throw SchemaError("'" + what + "' must be {p:[3], q:[4]}");
  }
  const auto& p = j.at("p");
  const auto& q = j.at("q");
  if (!p.is_array() || p.size() != 3 || !q.is_array() || q.size() != 4) {
    throw SchemaError("'" + what + "' must be {p:[3], q:[4]}");
  }
  for (const auto& v : p) {
    if (!v.is_number()) throw SchemaError("'" + what + ".p' must be numeric");
  }
  for (const auto& v : q) {
    if (!v.is_number()) throw SchemaError("'" + what + ".q' must be numeric");
  }
  Pose6 out;
  out.position = Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
  out.orientation = Quat(q[3].get<double>(), q[0].get<double>(), q[1].get<double>(),
                         q[2].get<double>());
  if (!out.position.allFinite()) throw ValidationError("'" + what + "' position not finite");
  if (std::abs(out.orientation.norm() - 1.0) > kInputQuatTolerance) {
    throw ValidationError("'" + what + "' quaternion is not unit length");
  }
  return out;
}

inline nlohmann::json to_json(const TrackedInput& in) {
  return {{"t", in.t},
          {"head", pose_to_json(in.head)},
          {"left", pose_to_json(in.left)},
          {"right", pose_to_json(in.right)}};
}

inline TrackedInput tracked_input_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("tracked input must be an object");
  if (!j.contains("t") || !j.at("t").is_number()) throw SchemaError("tracked input needs numeric 't'");
  for (const char* k : {"head", "left", "right"}) {
    if (!j.contains(k)) throw SchemaError(std::string("tracked input missing '") + k + "'");
  }
  TrackedInput in;
  in.t = j.at("t").get<double>();
  in.head = pose_from_json(j.at("head"), "head");
  in.left = pose_from_json(j.at("left"), "left");
  in.right = pose_from_json(j.at("right"), "right");
  return in;
}

inline std::vector<TrackedInput> read_trace(std::istream& is) {
  std::vector<TrackedInput> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    TrackedInput in = tracked_input_from_json(j);
    if (!out.empty() && !(in.t > out.back().t)) {
      throw ValidationError("trace line " + std::to_string(lineno) + ": timestamp not increasing");
    }
    out.push_back(std::move(in));
  }
  return out;
}

inline std::vector<TrackedInput> load_trace(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open trace " + path.string());
  return read_trace(is);
}

inline void write_trace(std::ostream& os, const std::vector<TrackedInput>& trace) {
  for (const auto& in : trace) os << to_json(in).dump() << '\n';
}

}  // namespace avr::human
