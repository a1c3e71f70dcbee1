#pragma once

#include "aerobat/config.hpp"
#include "aerobat/sim.hpp"

#include <filesystem>
#include <string>

namespace aerobat::io {

inline constexpr int kCsvSchemaVersion = 1;

/// Writes to a sibling temporary file and renames it over `path`.
void writeFileAtomic(const std::filesystem::path& path, const std::string& content);

/// Header row plus one line per log row; numbers in shortest round-trip form.
std::string formatCsv(const sim::TrajectoryLog& log);
void writeCsv(const std::filesystem::path& path, const sim::TrajectoryLog& log);

/// Parses a CSV produced by formatCsv. Throws ConfigError on unreadable or malformed input.
sim::TrajectoryLog readCsv(const std::filesystem::path& path);

config::Json metricsJson(const sim::Metrics& m);

/// Sidecar document: config echo, build version, summary metrics and failure (if any).
config::Json metadataJson(const config::Json& config_echo, const sim::ScenarioResult& result);

std::string gitDescribe();

}  // namespace aerobat::io
