#pragma once

// Shipped robot profiles. The same text lives in config/robots/*.toml; a unit
// test keeps the two in sync.

#include <string_view>

namespace avr::robot {

inline constexpr std::string_view kArmAProfileToml = R"toml(# armA: 7-DoF arm with alternating roll/pitch joints, finite roll limits.
schema_version = 1
name = "armA"
neutral_q = [0.0, 0.6, 0.0, -1.4, 0.0, 0.8, 0.0]

[ee_offset]
xyz = [0.0, 0.0, 0.126]

[[joints]]
name = "a1"
xyz = [0.0, 0.0, 0.34]
axis = [0.0, 0.0, 1.0]
limits = [-2.967, 2.967]

[[joints]]
name = "a2"
axis = [0.0, 1.0, 0.0]
limits = [-2.094, 2.094]

[[joints]]
name = "a3"
xyz = [0.0, 0.0, 0.2]
axis = [0.0, 0.0, 1.0]
limits = [-2.967, 2.967]

[[joints]]
name = "a4"
xyz = [0.0, 0.0, 0.2]
axis = [0.0, 1.0, 0.0]
limits = [-2.094, 2.094]

[[joints]]
name = "a5"
xyz = [0.0, 0.0, 0.2]
axis = [0.0, 0.0, 1.0]
limits = [-2.967, 2.967]

[[joints]]
name = "a6"
xyz = [0.0, 0.0, 0.2]
axis = [0.0, 1.0, 0.0]
limits = [-2.094, 2.094]

[[joints]]
name = "a7"
axis = [0.0, 0.0, 1.0]
limits = [-3.054, 3.054]

[tools.spoon]
xyz = [0.0, 0.0, 0.10]
[tools.cup]
xyz = [0.0, 0.0, 0.08]
[tools.scratcher]
xyz = [0.0, 0.0, 0.12]
[tools.wipe]
xyz = [0.0, 0.0, 0.05]
rpy = [3.141592653589793, 0.0, 0.0]

[bases.feeding]
xyz = [0.40, -0.55, 0.60]
rpy = [0.0, 0.0, 1.5708]
[bases.drinking]
xyz = [0.40, -0.55, 0.60]
rpy = [0.0, 0.0, 1.5708]
[bases.scratching]
xyz = [0.40, -0.55, 0.60]
rpy = [0.0, 0.0, 1.5708]
[bases.bathing]
xyz = [-0.40, -0.60, 0.75]
rpy = [0.0, 0.0, 0.0]
)toml";

inline constexpr std::string_view kArmBProfileToml = R"toml(# armB: compact 7-DoF arm with continuous roll joints.
schema_version = 1
name = "armB"
neutral_q = [0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0]

[ee_offset]
xyz = [0.0, 0.0, 0.16]

[[joints]]
name = "b1"
xyz = [0.0, 0.0, 0.2755]
axis = [0.0, 0.0, 1.0]
limits = [-6.2832, 6.2832]

[[joints]]
name = "b2"
axis = [0.0, 1.0, 0.0]
limits = [-2.094, 2.094]

[[joints]]
name = "b3"
xyz = [0.0, 0.0, 0.205]
axis = [0.0, 0.0, 1.0]
limits = [-6.2832, 6.2832]

[[joints]]
name = "b4"
xyz = [0.0, 0.0, 0.205]
axis = [0.0, 1.0, 0.0]
limits = [-2.094, 2.094]

[[joints]]
name = "b5"
xyz = [0.0, 0.0, 0.2]
axis = [0.0, 0.0, 1.0]
limits = [-6.2832, 6.2832]

[[joints]]
name = "b6"
xyz = [0.0, 0.0, 0.1]
axis = [0.0, 1.0, 0.0]
limits = [-2.094, 2.094]

[[joints]]
name = "b7"
xyz = [0.0, 0.0, 0.1]
axis = [0.0, 0.0, 1.0]
limits = [-6.2832, 6.2832]

[tools.spoon]
xyz = [0.0, 0.0, 0.10]
[tools.cup]
xyz = [0.0, 0.0, 0.08]
[tools.scratcher]
xyz = [0.0, 0.0, 0.12]
[tools.wipe]
xyz = [0.0, 0.0, 0.05]
rpy = [3.141592653589793, 0.0, 0.0]

[bases.feeding]
xyz = [0.40, -0.45, 0.70]
rpy = [0.0, 0.0, 1.5708]
[bases.drinking]
xyz = [0.40, -0.45, 0.70]
rpy = [0.0, 0.0, 1.5708]
[bases.scratching]
xyz = [0.40, -0.45, 0.70]
rpy = [0.0, 0.0, 1.5708]
[bases.bathing]
xyz = [-0.40, -0.50, 0.45]
rpy = [0.0, 0.0, 0.0]
)toml";

}  // namespace avr::robot
