#pragma once

#include <string>

#include "avr/core/errors.hpp"

namespace avr::human {

enum class Sex { male, female };

inline const char* to_string(Sex s) { return s == Sex::male ? "male" : "female"; }

inline Sex sex_from_string(const std::string& s) {
  if (s == "male") return Sex::male;
  if (s == "female") return Sex::female;
  throw ValidationError("unknown sex '" + s + "'");
}

inline constexpr double kMinTorsoHeight = 0.40;
inline constexpr double kMaxTorsoHeight = 0.80;
inline constexpr double kHeadRadius = 0.09;
inline constexpr double kMouthForward = 0.08;

/// Body dimensions in meters. Torso height is hipbone (waist center) to head
/// center.
struct Anthropometrics {
  Sex sex = Sex::male;
  double torso_height = 0.60;
  double neck_drop = 0.15;            // head center down to shoulder line
  double shoulder_half_width = 0.19;
  double upper_arm = 0.30;
  double forearm = 0.26;
  double hand = 0.08;
  double torso_radius = 0.13;
  double upper_arm_radius = 0.045;
  double forearm_radius = 0.04;
  double hand_radius = 0.04;
  double head_radius = kHeadRadius;
  double total_height_scale = 1.0;

  void validate() const {
    if (!(torso_height >= kMinTorsoHeight && torso_height <= kMaxTorsoHeight)) {
      throw ValidationError("torso height " + std::to_string(torso_height) +
                            " m outside [0.40, 0.80]");
    }
    for (double v : {neck_drop, shoulder_half_width, upper_arm, forearm, hand, torso_radius,
                     upper_arm_radius, forearm_radius, hand_radius, head_radius,
                     total_height_scale}) {
      if (!(v > 0.0)) throw ValidationError("anthropometric lengths and radii must be > 0");
    }
    if (!(neck_drop < torso_height)) throw ValidationError("neck drop exceeds torso height");
  }

  bool operator==(const Anthropometrics&) const = default;
};

// 50th-percentile-style defaults; torso heights are the midpoints of the
// randomized training ranges.
inline Anthropometrics default_anthropometrics(Sex sex) {
  Anthropometrics a;
  a.sex = sex;
  if (sex == Sex::female) {
    a.torso_height = 0.54;
    a.neck_drop = 0.14;
    a.shoulder_half_width = 0.17;
    a.upper_arm = 0.275;
    a.forearm = 0.235;
    a.hand = 0.07;
    a.torso_radius = 0.12;
    a.upper_arm_radius = 0.04;
    a.forearm_radius = 0.035;
    a.hand_radius = 0.035;
  }
  return a;
}

/// Multiplies every segment length (not radii) by `scale`.
inline Anthropometrics scaled(const Anthropometrics& a, double scale) {
  if (!(scale > 0.0)) throw ValidationError("height scale must be > 0");
  Anthropometrics out = a;
  out.torso_height *= scale;
  out.neck_drop *= scale;
  out.shoulder_half_width *= scale;
  out.upper_arm *= scale;
  out.forearm *= scale;
  out.hand *= scale;
  out.total_height_scale *= scale;
  return out;
}

}  // namespace avr::human
