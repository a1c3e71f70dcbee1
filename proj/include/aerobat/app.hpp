#pragma once

#include "aerobat/config.hpp"
#include "aerobat/sim.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

// Scenario execution, sweeps and output placement shared by the command-line front end.
namespace aerobat::app {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "AEROBAT_OUTPUT_DIR";

/// Flag value if given, then the environment variable, then the configured directory.
std::filesystem::path outputDirectory(const std::optional<std::filesystem::path>& flag, const sim::SimConfig& cfg);

struct RunArtifacts {
    sim::ScenarioResult result;
    std::filesystem::path csv;
    std::filesystem::path metadata;
};

/// Runs the scenario described by `doc` and writes the CSV and metadata into `out_dir`.
RunArtifacts runAndWrite(const config::Json& doc, const std::filesystem::path& out_dir);

/// Plain-text table of the scenario metrics.
std::string summaryTable(const sim::ScenarioResult& result);

struct SweepPoint {
    std::string label;                             // directory name, e.g. "run_003"
    std::vector<std::pair<std::string, std::string>> assignments;  // key, value text
    config::Json doc;
};

/// Splits "key=v1,v2,..." on top-level commas; brackets and quotes group.
std::pair<std::string, std::vector<std::string>> parseAxis(const std::string& axis);

/// Cartesian product of the axes applied on top of `base`, first axis varying slowest.
std::vector<SweepPoint> sweepGrid(const config::Json& base, const std::vector<std::string>& axes);

struct SweepOutcome {
    SweepPoint point;
    sim::Metrics metrics;
    std::optional<sim::Failure> failure;
    std::string error;  // configuration or I/O problem for this point
    bool ok() const { return !failure && error.empty(); }
};

/// Runs every point on `jobs` worker threads, one subdirectory per point, and writes sweep.csv.
std::vector<SweepOutcome> runSweep(const std::vector<SweepPoint>& points, const std::filesystem::path& out_dir,
                                   int jobs);

std::string sweepTable(const std::vector<SweepOutcome>& outcomes);

}  // namespace aerobat::app
