#pragma once

#include <string>
#include <string_view>

#include "ergolab/sweep.hpp"

namespace ergolab {

enum class Profile { paper, desk };

/// Built-in named parameter sets. The paper profile carries the full-size
/// runs; the desk profile shrinks agent counts and episodes to something a
/// laptop finishes in minutes. The bundled files under configs/ mirror
/// these presets byte for byte.
SweepConfig profile_config(ExperimentKind kind, Profile profile);

/// Parses the flat `key = value` config format. Unknown keys, malformed
/// values and out-of-range parameters raise ConfigError naming the key.
SweepConfig parse_config_text(std::string_view text, const std::string& origin = "config");

SweepConfig parse_config(const std::string& path);

/// Serialises a SweepConfig in the same format parse_config reads.
std::string config_to_text(const SweepConfig& config);

}  // namespace ergolab
