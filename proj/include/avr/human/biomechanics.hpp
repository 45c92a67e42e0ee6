#pragma once

#include <string>
#include <utility>

#include "avr/core/rng.hpp"
#include "avr/human/anthropometrics.hpp"
#include "avr/human/body.hpp"

namespace avr::human {

/// fixed: 50th-percentile models with an upright waist.
/// randomized: torso height and initial waist angles drawn per episode.
enum class BiomechMode { fixed, randomized };

inline const char* to_string(BiomechMode m) { return m == BiomechMode::fixed ? "fixed" : "randomized"; }

inline BiomechMode biomech_mode_from_string(const std::string& s) {
  if (s == "fixed") return BiomechMode::fixed;
  if (s == "randomized") return BiomechMode::randomized;
  throw ValidationError("unknown biomech mode '" + s + "' (expected fixed|randomized)");
}

struct TorsoRange {
  double lo;
  double hi;
};

inline constexpr TorsoRange kMaleTorsoRange{0.50, 0.70};
inline constexpr TorsoRange kFemaleTorsoRange{0.44, 0.64};
inline constexpr double kWaistRandomRange = 10.0 * kPi / 180.0;

inline TorsoRange torso_range(Sex sex) { return sex == Sex::male ? kMaleTorsoRange : kFemaleTorsoRange; }

struct BiomechSample {
  Anthropometrics anthro;
  Angles3 waist{0.0, 0.0, 0.0};
};

/// Draws a simulated person's body. Only torso height changes in randomized
/// mode; limb dimensions stay at the defaults for the given sex.
inline BiomechSample sample_biomechanics(Rng& rng, Sex sex, BiomechMode mode) {
  BiomechSample s{default_anthropometrics(sex), {0.0, 0.0, 0.0}};
  if (mode == BiomechMode::randomized) {
    const TorsoRange r = torso_range(sex);
    s.anthro.torso_height = uniform(rng, r.lo, r.hi);
    for (double& w : s.waist) w = uniform(rng, -kWaistRandomRange, kWaistRandomRange);
  }
  return s;
}

}  // namespace avr::human
