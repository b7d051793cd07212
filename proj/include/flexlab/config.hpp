#pragma once

#include "flexlab/codec.hpp"
#include "flexlab/engine.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace flexlab {

/// Builds a SimConfig from a config document with sections `zones`, `plant`,
/// `baseline`, `weather_path`, `dt_s` and `initial_temp_c`. Relative weather
/// paths resolve against `base_dir`. Every problem is collected into a
/// single ValidationError with field paths.
SimConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir);

/// Reads and validates a config document from disk.
SimConfig load_config(const std::filesystem::path& path);

/// Same checks as load_config, returned instead of thrown. Empty when valid.
std::vector<std::string> validate_config_file(const std::filesystem::path& path);

/// The document form of a config (weather referenced by path).
Json config_to_json(const SimConfig& config);

ScenarioScript load_script(const std::filesystem::path& path);

}  // namespace flexlab
