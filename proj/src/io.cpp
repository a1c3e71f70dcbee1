#include "aerobat/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#ifndef AEROBAT_GIT_DESCRIBE
#define AEROBAT_GIT_DESCRIBE "unknown"
#endif

namespace aerobat::io {

namespace fs = std::filesystem;

void writeFileAtomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

namespace {

void appendNumber(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

}  // namespace

std::string formatCsv(const sim::TrajectoryLog& log) {
    std::string out;
    out.reserve(log.rows.size() * log.columns.size() * 12 + 4096);
    for (std::size_t c = 0; c < log.columns.size(); ++c) {
        if (c) out += ',';
        out += log.columns[c];
    }
    out += '\n';
    for (const auto& row : log.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            appendNumber(out, row[c]);
        }
        out += '\n';
    }
    return out;
}

void writeCsv(const fs::path& path, const sim::TrajectoryLog& log) { writeFileAtomic(path, formatCsv(log)); }

sim::TrajectoryLog readCsv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read log '" + path.string() + "'");
    sim::TrajectoryLog log;
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw ConfigError("log '" + path.string() + "' is empty");
    std::stringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) log.columns.push_back(name);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(log.columns.size());
        const char* p = line.data();
        const char* end = p + line.size();
        while (p <= end) {
            double v = 0;
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc()) throw ConfigError("malformed number on line " + std::to_string(lineno) + " of '" + path.string() + "'");
            row.push_back(v);
            p = res.ptr;
            if (p == end) break;
            if (*p != ',') throw ConfigError("malformed line " + std::to_string(lineno) + " of '" + path.string() + "'");
            ++p;
        }
        if (row.size() != log.columns.size())
            throw ConfigError("line " + std::to_string(lineno) + " of '" + path.string() + "' has " +
                              std::to_string(row.size()) + " fields, expected " + std::to_string(log.columns.size()));
        log.rows.push_back(std::move(row));
    }
    return log;
}

config::Json metricsJson(const sim::Metrics& m) {
    return {{"rms_position_error_m", m.rms_position_error},
            {"max_attitude_error_rad", m.max_attitude_error},
            {"saturation_fraction", m.saturation_fraction},
            {"max_observer_error", m.max_observer_error},
            {"final_disturbance_error", m.final_disturbance_error},
            {"max_rotation_error", m.max_rotation_error},
            {"rows", m.ticks}};
}

config::Json metadataJson(const config::Json& config_echo, const sim::ScenarioResult& result) {
    config::Json doc;
    doc["csv_schema_version"] = kCsvSchemaVersion;
    doc["git_describe"] = gitDescribe();
    doc["status"] = result.ok() ? "ok" : "failed";
    if (result.failure)
        doc["failure"] = {{"kind", result.failure->kind},
                          {"message", result.failure->message},
                          {"time", result.failure->time}};
    doc["metrics"] = metricsJson(result.metrics);
    doc["config"] = config_echo;
    return doc;
}

std::string gitDescribe() { return AEROBAT_GIT_DESCRIBE; }

}  // namespace aerobat::io
