#pragma once

#include <map>
#include <string>
#include <string_view>

#include "accel_alloc/cost_model.hpp"
#include "accel_alloc/search_space.hpp"

namespace accel_alloc {

/// Contents of a config file. Hardware constants sit at the top level under
/// their own names; "levels" holds {"pe_values", "buf_values"}; "presets"
/// maps a platform name to a constraint string such as "area:60000".
/// Anything absent keeps its default.
struct AppConfig {
  HwConstants hw;
  ActionLevels levels = default_levels();
  std::map<std::string, std::string> presets;
};

AppConfig parse_config(std::string_view text);

/// The shipped config/default.json, compiled in: default constants and levels
/// plus the platform presets.
AppConfig default_config();
AppConfig load_config(const std::string& path);

/// "area:X", "power:X", "counts:PE:BUF", "unconstrained", or a preset name.
ConstraintSpec parse_constraint(std::string_view text, Deployment deployment,
                                const std::map<std::string, std::string>& presets = {});

}  // namespace accel_alloc
