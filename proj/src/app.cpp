#include "aerobat/app.hpp"

#include "aerobat/errors.hpp"
#include "aerobat/io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <thread>

namespace aerobat::app {

namespace fs = std::filesystem;

fs::path outputDirectory(const std::optional<fs::path>& flag, const sim::SimConfig& cfg) {
    if (flag) return *flag;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return fs::path(env);
    return fs::path(cfg.output_dir);
}

RunArtifacts runAndWrite(const config::Json& doc, const fs::path& out_dir) {
    sim::SimConfig cfg = config::fromJson(doc);
    cfg.validate();
    RunArtifacts a;
    a.result = sim::runScenario(cfg);
    a.csv = out_dir / cfg.csv_name;
    a.metadata = out_dir / cfg.metadata_name;
    io::writeCsv(a.csv, a.result.log);
    io::writeFileAtomic(a.metadata, io::metadataJson(doc, a.result).dump(2) + "\n");
    return a;
}

std::string summaryTable(const sim::ScenarioResult& r) {
    const sim::Metrics& m = r.metrics;
    char buf[1024];
    std::snprintf(buf, sizeof buf,
                  "%-28s %s\n"
                  "%-28s %d\n"
                  "%-28s %.6g\n"
                  "%-28s %.6g\n"
                  "%-28s %.6g\n"
                  "%-28s %.6g\n"
                  "%-28s %.6g\n",
                  "status", r.ok() ? "ok" : ("failed (" + r.failure->kind + ")").c_str(), "rows", m.ticks,
                  "rms position error [m]", m.rms_position_error, "max attitude error [deg]",
                  m.max_attitude_error * 180.0 / std::numbers::pi, "saturation fraction", m.saturation_fraction,
                  "max observer error", m.max_observer_error, "final disturbance error", m.final_disturbance_error);
    std::string out = buf;
    if (r.failure) {
        std::snprintf(buf, sizeof buf, "%-28s t = %.6g s: %s\n", "failure", r.failure->time, r.failure->message.c_str());
        out += buf;
    }
    return out;
}

std::pair<std::string, std::vector<std::string>> parseAxis(const std::string& axis) {
    const std::size_t eq = axis.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == axis.size())
        throw ConfigError("sweep axis must look like key=v1,v2,... (got '" + axis + "')");
    std::vector<std::string> values;
    std::string current;
    int depth = 0;
    bool quoted = false;
    for (std::size_t i = eq + 1; i < axis.size(); ++i) {
        const char c = axis[i];
        if (c == '"') quoted = !quoted;
        if (!quoted && (c == '[' || c == '{')) ++depth;
        if (!quoted && (c == ']' || c == '}')) --depth;
        if (c == ',' && depth == 0 && !quoted) {
            values.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    values.push_back(current);
    for (const std::string& v : values)
        if (v.empty()) throw ConfigError("empty value in sweep axis '" + axis + "'");
    return {axis.substr(0, eq), values};
}

std::vector<SweepPoint> sweepGrid(const config::Json& base, const std::vector<std::string>& axes) {
    std::vector<std::pair<std::string, std::vector<std::string>>> parsed;
    for (const std::string& a : axes) parsed.push_back(parseAxis(a));

    std::size_t total = 1;
    for (const auto& p : parsed) total *= p.second.size();

    std::vector<SweepPoint> points;
    for (std::size_t n = 0; n < total; ++n) {
        SweepPoint pt;
        pt.doc = base;
        std::size_t rest = n;
        std::vector<std::size_t> index(parsed.size());
        for (std::size_t k = parsed.size(); k-- > 0;) {
            index[k] = rest % parsed[k].second.size();
            rest /= parsed[k].second.size();
        }
        for (std::size_t k = 0; k < parsed.size(); ++k) {
            const std::string& value = parsed[k].second[index[k]];
            config::applyOverride(pt.doc, parsed[k].first + "=" + value);
            pt.assignments.emplace_back(parsed[k].first, value);
        }
        char label[32];
        std::snprintf(label, sizeof label, "run_%03zu", n);
        pt.label = label;
        points.push_back(std::move(pt));
    }
    return points;
}

namespace {

std::string csvField(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string sweepCsv(const std::vector<SweepOutcome>& outcomes) {
    std::string out = "label";
    if (!outcomes.empty())
        for (const auto& [key, value] : outcomes.front().point.assignments) out += "," + csvField(key);
    out += ",status,rms_position_error_m,max_attitude_error_rad,saturation_fraction,final_disturbance_error\n";
    for (const SweepOutcome& o : outcomes) {
        out += o.point.label;
        for (const auto& [key, value] : o.point.assignments) out += "," + csvField(value);
        const std::string status = !o.error.empty() ? "error" : o.failure ? o.failure->kind : "ok";
        char buf[256];
        std::snprintf(buf, sizeof buf, ",%s,%.17g,%.17g,%.17g,%.17g\n", status.c_str(), o.metrics.rms_position_error,
                      o.metrics.max_attitude_error, o.metrics.saturation_fraction,
                      o.metrics.final_disturbance_error);
        out += buf;
    }
    return out;
}

}  // namespace

std::vector<SweepOutcome> runSweep(const std::vector<SweepPoint>& points, const fs::path& out_dir, int jobs) {
    if (jobs < 1) throw ConfigError("--jobs must be at least 1");
    std::vector<SweepOutcome> outcomes(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            SweepOutcome& o = outcomes[i];
            o.point = points[i];
            try {
                const RunArtifacts a = runAndWrite(points[i].doc, out_dir / points[i].label);
                o.metrics = a.result.metrics;
                o.failure = a.result.failure;
            } catch (const std::exception& e) {
                o.error = e.what();
            }
        }
    };
    const int n = std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(points.size(), 1)));
    std::vector<std::thread> pool;
    for (int k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    io::writeFileAtomic(out_dir / "sweep.csv", sweepCsv(outcomes));
    return outcomes;
}

std::string sweepTable(const std::vector<SweepOutcome>& outcomes) {
    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-9s %-12s %14s %14s %10s  %s\n", "label", "status", "rms pos [m]", "max att [deg]",
                  "sat frac", "assignments");
    out += buf;
    for (const SweepOutcome& o : outcomes) {
        std::string assign;
        for (const auto& [key, value] : o.point.assignments) assign += (assign.empty() ? "" : " ") + key + "=" + value;
        const std::string status = !o.error.empty() ? "error" : o.failure ? o.failure->kind : "ok";
        std::snprintf(buf, sizeof buf, "%-9s %-12s %14.6g %14.6g %10.4g  %s\n", o.point.label.c_str(), status.c_str(),
                      o.metrics.rms_position_error, o.metrics.max_attitude_error * 180.0 / std::numbers::pi,
                      o.metrics.saturation_fraction, assign.c_str());
        out += buf;
        if (!o.error.empty()) out += "          " + o.error + "\n";
    }
    return out;
}

}  // namespace aerobat::app
