#include "aerobat/plotdata.hpp"

#include <charconv>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

namespace aerobat::plot {

namespace {

const std::array<const char*, 6> kChannels{"x", "y", "z", "roll", "pitch", "yaw"};

void requireRows(const sim::TrajectoryLog& log) {
    if (log.rows.empty()) throw ConfigError("log has no rows");
}

void appendColumn(std::vector<Sample>& out, const sim::TrajectoryLog& log, const std::string& column,
                  const std::string& series) {
    const int t = log.column("t");
    const int c = log.column(column);
    for (const auto& row : log.rows) out.push_back({row[t], series, row[c]});
}

}  // namespace

Figure figureFromString(const std::string& name) {
    if (name == "gen-forces") return Figure::GenForces;
    if (name == "tracking") return Figure::Tracking;
    throw ConfigError("unknown figure '" + name + "' (options: gen-forces, tracking)");
}

std::string toString(Figure f) { return f == Figure::GenForces ? "gen-forces" : "tracking"; }

std::vector<std::string> figureNames() { return {"gen-forces", "tracking"}; }

std::vector<Sample> genForces(const sim::TrajectoryLog& log) {
    requireRows(log);
    std::vector<Sample> out;
    for (const char* prefix : {"inertial_", "aero_"})
        for (const char* c : kChannels) appendColumn(out, log, std::string(prefix) + c, std::string(prefix) + c);
    return out;
}

std::vector<Sample> tracking(const sim::TrajectoryLog& log) {
    requireRows(log);
    std::vector<Sample> out;
    for (const char* c : kChannels) {
        appendColumn(out, log, c, c);
        appendColumn(out, log, std::string("sp_") + c, std::string(c) + "_setpoint");
    }
    return out;
}

std::vector<Sample> figure(const sim::TrajectoryLog& log, Figure f) {
    return f == Figure::GenForces ? genForces(log) : tracking(log);
}

std::string formatLong(const std::vector<Sample>& samples) {
    std::string out = "t,series,value\n";
    char buf[32];
    for (const Sample& s : samples) {
        out.append(buf, std::to_chars(buf, buf + sizeof buf, s.t).ptr);
        out += ',';
        out += s.series;
        out += ',';
        out.append(buf, std::to_chars(buf, buf + sizeof buf, s.value == 0.0 ? 0.0 : s.value).ptr);
        out += '\n';
    }
    return out;
}

std::vector<double> seriesValues(const std::vector<Sample>& samples, const std::string& series) {
    std::vector<double> out;
    for (const Sample& s : samples)
        if (s.series == series) out.push_back(s.value);
    return out;
}

Spectrum dominantFrequency(const std::vector<double>& samples, double sample_rate) {
    const std::size_t n = samples.size();
    if (n < 4) throw ConfigError("need at least four samples for a spectrum");
    if (!(sample_rate > 0)) throw ConfigError("sample rate must be positive");
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
    Spectrum best;
    best.resolution = sample_rate / static_cast<double>(n);
    double best_power = -1;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        std::complex<double> acc = 0;
        const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) acc += (samples[j] - mean) * std::polar(1.0, w * static_cast<double>(j));
        const double power = std::norm(acc);
        if (power > best_power) {
            best_power = power;
            best.bin = static_cast<int>(k);
        }
    }
    best.frequency = best.bin * best.resolution;
    return best;
}

}  // namespace aerobat::plot
