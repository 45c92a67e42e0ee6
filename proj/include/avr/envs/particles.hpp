#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "avr/core/geometry.hpp"
#include "avr/core/pose.hpp"
#include "avr/envs/config.hpp"

namespace avr::envs {

enum class ParticleStatus { held, free, captured, spilled };

inline const char* to_string(ParticleStatus s) {
  switch (s) {
    case ParticleStatus::held: return "held";
    case ParticleStatus::free: return "free";
    case ParticleStatus::captured: return "captured";
    case ParticleStatus::spilled: return "spilled";
  }
  return "?";
}

inline ParticleStatus particle_status_from_string(const std::string& s) {
  for (auto st : {ParticleStatus::held, ParticleStatus::free, ParticleStatus::captured, ParticleStatus::spilled}) {
    if (s == to_string(st)) return st;
  }
  throw SchemaError("unknown particle status '" + s + "'");
}

struct Particle {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  ParticleStatus status = ParticleStatus::held;
  Vec3 local = Vec3::Zero();    // offset in the utensil frame while held
  double release_angle = 0.0;   // utensil tilt at which this particle leaves
};

struct ParticleCounts {
  int held = 0;
  int free = 0;
  int captured = 0;
  int spilled = 0;
  int total() const { return held + free + captured + spilled; }
};

inline ParticleCounts count(const std::vector<Particle>& ps) {
  ParticleCounts c;
  for (const Particle& p : ps) {
    switch (p.status) {
      case ParticleStatus::held: ++c.held; break;
      case ParticleStatus::free: ++c.free; break;
      case ParticleStatus::captured: ++c.captured; break;
      case ParticleStatus::spilled: ++c.spilled; break;
    }
  }
  return c;
}

/// Angle between the utensil's z axis and world up.
inline double tilt_angle(const Pose6& utensil) {
  const Vec3 z = utensil.rotation().col(2);
  return std::acos(std::clamp(z.z(), -1.0, 1.0));
}

/// Food: a small ring of spheres on the spoon bowl, all released together.
inline std::vector<Particle> spoon_particles(const ParticleConfig& c, const Pose6& utensil) {
  std::vector<Particle> ps(static_cast<std::size_t>(c.food));
  for (int i = 0; i < c.food; ++i) {
    const double a = 2.0 * kPi * i / c.food;
    const double r = i == 0 ? 0.0 : 0.6 * c.spoon_radius;
    Particle& p = ps[static_cast<std::size_t>(i)];
    p.local = Vec3(r * std::cos(a), r * std::sin(a), 0.005);
    p.position = utensil.transform_point(p.local);
    p.release_angle = c.spoon_release_angle;
  }
  return ps;
}

/// Water: particles stacked below the rim. The lip model releases them one by
/// one as the tilt sweeps from the min to the max pour angle.
inline std::vector<Particle> cup_particles(const ParticleConfig& c, const Pose6& utensil) {
  std::vector<Particle> ps(static_cast<std::size_t>(c.water));
  const int n = c.water;
  for (int i = 0; i < n; ++i) {
    const double f = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    const double a = 2.4 * i;  // golden-angle spiral
    const double r = 0.7 * c.cup_radius * std::sqrt((i % 10 + 0.5) / 10.0);
    Particle& p = ps[static_cast<std::size_t>(i)];
    p.local = Vec3(r * std::cos(a), r * std::sin(a), -c.cup_height * (0.1 + 0.8 * f));
    p.position = utensil.transform_point(p.local);
    p.release_angle = c.cup_pour_angle_min + f * (c.cup_pour_angle_max - c.cup_pour_angle_min);
  }
  return ps;
}

struct ParticleEvents {
  int captured = 0;
  int spilled = 0;
};

enum class Utensil { spoon, cup };

/// Lowest rim point of a tilted cup, where it pours from.
inline Vec3 pour_point(const Pose6& utensil, double rim_radius) {
  const Vec3 z = utensil.rotation().col(2);
  const Vec3 down = -Vec3::UnitZ() + z * z.z();
  if (down.norm() < 1e-9) return utensil.position;
  return utensil.position + rim_radius * down.normalized();
}

/// One physics substep. Held particles ride the utensil and leave it once the
/// tilt passes their release angle; cup particles leave from the pour point.
/// Free particles fall under gravity. A free particle whose path passes within
/// the capture radius of the mouth is captured; one lower than utensil height
/// minus the spill drop is spilled. Spoon particles held within the capture
/// radius of the mouth are captured directly.
inline ParticleEvents step_particles(std::vector<Particle>& ps, const Pose6& utensil, const Vec3& mouth,
                                     const ParticleConfig& c, double dt, Utensil kind) {
  if (!(dt > 0.0)) throw ValidationError("step_particles: dt must be > 0");
  ParticleEvents ev;
  const double tilt = tilt_angle(utensil);
  const double r2 = c.mouth_capture_radius * c.mouth_capture_radius;
  for (Particle& p : ps) {
    if (p.status == ParticleStatus::held) {
      p.position = utensil.transform_point(p.local);
      p.velocity.setZero();
      if (kind == Utensil::spoon && (p.position - mouth).squaredNorm() <= r2) {
        p.status = ParticleStatus::captured;
        ++ev.captured;
      } else if (tilt > p.release_angle) {
        p.status = ParticleStatus::free;
        if (kind == Utensil::cup) p.position = pour_point(utensil, c.cup_radius);
        if ((p.position - mouth).squaredNorm() <= r2) {
          p.status = ParticleStatus::captured;
          ++ev.captured;
        }
      }
      continue;
    }
    if (p.status != ParticleStatus::free) continue;
    const Vec3 before = p.position;
    p.velocity.z() -= c.gravity * dt;
    p.position += p.velocity * dt;
    if (distance_segment_point(before, p.position, mouth) <= c.mouth_capture_radius) {
      p.status = ParticleStatus::captured;
      ++ev.captured;
    } else if (p.position.z() < utensil.position.z() - c.spill_drop) {
      p.status = ParticleStatus::spilled;
      ++ev.spilled;
    }
  }
  return ev;
}

}  // namespace avr::envs
