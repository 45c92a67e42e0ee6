#pragma once

// TOML chain schema (schema_version = 1):
//
//   schema_version = 1
//   name = "armB"
//   [base]       xyz = [x, y, z]    rpy = [roll, pitch, yaw]      (m, rad)
//   [ee_offset]  xyz = [...]        rpy = [...]
//   [[joints]]   name = "j1"  xyz = [...]  rpy = [...]  axis = [ax, ay, az]
//                limits = [lo, hi]                                 (rad)
//
// Every joint's xyz/rpy is the offset from the previous joint frame (the base
// for the first joint). rpy composes as Rz(yaw) * Ry(pitch) * Rx(roll).

#include <toml.hpp>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "avr/kinematics/joint_chain.hpp"

namespace avr::kin {

inline constexpr std::int64_t kChainSchemaVersion = 1;

namespace toml_detail {

inline std::array<double, 3> read3(const toml::node_view<const toml::node>& node,
                                   const std::string& what, std::array<double, 3> fallback,
                                   bool required = false) {
  const toml::array* arr = node.as_array();
  if (!arr) {
    if (required) throw ConfigError("missing 3-vector '" + what + "'");
    return fallback;
  }
  if (arr->size() != 3) throw ConfigError("'" + what + "' must have 3 elements");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto v = (*arr)[i].value<double>();
    if (!v) throw ConfigError("'" + what + "' must be numeric");
    out[i] = *v;
  }
  return out;
}

}  // namespace toml_detail

inline Pose6 pose_from_toml(const toml::node_view<const toml::node>& node, const std::string& what) {
  if (!node) return Pose6::identity();
  if (!node.is_table()) throw ConfigError("'" + what + "' must be a table");
  const auto xyz = toml_detail::read3(node["xyz"], what + ".xyz", {0, 0, 0});
  const auto rpy = toml_detail::read3(node["rpy"], what + ".rpy", {0, 0, 0});
  return {Vec3(xyz[0], xyz[1], xyz[2]), quat_from_rpy(rpy[0], rpy[1], rpy[2])};
}

inline JointChain chain_from_toml(const toml::table& root) {
  const toml::node_view<const toml::node> view{root};
  const auto version = view["schema_version"].value<std::int64_t>();
  if (!version) throw ConfigError("chain file missing schema_version");
  if (*version != kChainSchemaVersion) {
    throw ConfigError("unsupported chain schema_version " + std::to_string(*version));
  }
  const toml::array* joints = view["joints"].as_array();
  if (!joints || joints->empty()) throw ConfigError("chain file has no [[joints]]");

  std::vector<Link> links;
  for (std::size_t i = 0; i < joints->size(); ++i) {
    const toml::table* jt = (*joints)[i].as_table();
    if (!jt) throw ConfigError("joints[" + std::to_string(i) + "] must be a table");
    const toml::node_view<const toml::node> jv{*jt};
    const std::string tag = "joints[" + std::to_string(i) + "]";
    Link l;
    l.name = jv["name"].value_or(std::string("j") + std::to_string(i + 1));
    l.parent_offset = pose_from_toml(jv, tag);
    const auto axis = toml_detail::read3(jv["axis"], tag + ".axis", {0, 0, 1}, true);
    l.axis = Vec3(axis[0], axis[1], axis[2]);
    const toml::array* lim = jv["limits"].as_array();
    if (!lim || lim->size() != 2) throw ConfigError(tag + ".limits must be [lo, hi]");
    const auto lo = (*lim)[0].value<double>();
    const auto hi = (*lim)[1].value<double>();
    if (!lo || !hi) throw ConfigError(tag + ".limits must be numeric");
    l.lower = *lo;
    l.upper = *hi;
    links.push_back(std::move(l));
  }
  return JointChain(std::move(links), pose_from_toml(view["base"], "base"),
                    pose_from_toml(view["ee_offset"], "ee_offset"));
}

inline toml::table parse_toml_file(const std::filesystem::path& path) {
  try {
    return toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ConfigError(path.string() + ": " + std::string(e.description()));
  }
}

inline JointChain load_chain_file(const std::filesystem::path& path) {
  return chain_from_toml(parse_toml_file(path));
}

}  // namespace avr::kin
