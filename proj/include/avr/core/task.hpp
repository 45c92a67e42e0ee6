#pragma once

#include <array>
#include <string>

#include "avr/core/errors.hpp"

namespace avr {

enum class Task { feeding, drinking, scratching, bathing };

inline constexpr std::array<Task, 4> kAllTasks{Task::feeding, Task::drinking, Task::scratching,
                                               Task::bathing};

inline const char* to_string(Task t) {
  switch (t) {
    case Task::feeding: return "feeding";
    case Task::drinking: return "drinking";
    case Task::scratching: return "scratching";
    case Task::bathing: return "bathing";
  }
  return "?";
}

inline Task task_from_string(const std::string& s) {
  for (Task t : kAllTasks) {
    if (s == to_string(t)) return t;
  }
  throw ValidationError("unknown task '" + s + "'");
}

enum class RobotProfile { armA, armB };

inline constexpr std::array<RobotProfile, 2> kAllProfiles{RobotProfile::armA, RobotProfile::armB};

inline const char* to_string(RobotProfile p) { return p == RobotProfile::armA ? "armA" : "armB"; }

inline RobotProfile profile_from_string(const std::string& s) {
  if (s == "armA") return RobotProfile::armA;
  if (s == "armB") return RobotProfile::armB;
  throw ValidationError("unknown robot profile '" + s + "' (expected armA|armB)");
}

}  // namespace avr
