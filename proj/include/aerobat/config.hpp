#pragma once

#include "aerobat/sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

// Versioned JSON configuration with one section per module and dotted-key overrides.
namespace aerobat::config {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Full document for a configuration, including schema_version.
Json toJson(const sim::SimConfig& cfg);

/// Reads every key of a complete document; throws ConfigError on missing or mistyped entries.
sim::SimConfig fromJson(const Json& doc);

/// Dotted leaf keys accepted in files and overrides (arrays are single leaves).
std::vector<std::string> validKeys();

/// Overlays a partial document onto `base`. Unknown keys and type mismatches throw ConfigError.
void merge(Json& base, const Json& partial);

/// Applies "section.key=value". The value is parsed as JSON, falling back to a plain string.
void applyOverride(Json& doc, const std::string& assignment);

/// Defaults overlaid with the file's contents; throws ConfigError naming the path when unreadable.
Json loadFile(const std::filesystem::path& path);

/// Convenience: defaults (or file) plus overrides, validated.
sim::SimConfig resolve(const std::filesystem::path* path, const std::vector<std::string>& overrides, Json* echo);

}  // namespace aerobat::config
