#pragma once

#include "aerobat/sim.hpp"

#include <string>
#include <vector>

// Long-format series (t, series, value) mirroring the tracking and generalized-force figures.
namespace aerobat::plot {

enum class Figure { GenForces, Tracking };

Figure figureFromString(const std::string& name);
std::string toString(Figure f);
std::vector<std::string> figureNames();

struct Sample {
    double t;
    std::string series;
    double value;
};

/// inertial_<channel> = g2^{-1} g1 and aero_<channel> = g2^{-1} g3 xhat3 for the six channels.
std::vector<Sample> genForces(const sim::TrajectoryLog& log);

/// x, y, z, roll, pitch, yaw and their <channel>_setpoint companions.
std::vector<Sample> tracking(const sim::TrajectoryLog& log);

std::vector<Sample> figure(const sim::TrajectoryLog& log, Figure f);

std::string formatLong(const std::vector<Sample>& samples);

/// Values of one series in time order.
std::vector<double> seriesValues(const std::vector<Sample>& samples, const std::string& series);

struct Spectrum {
    double frequency{0};   // Hz, dominant non-DC bin
    int bin{0};
    double resolution{0};  // Hz per bin
};

/// Dominant frequency of uniformly sampled data after mean removal (direct DFT, DC excluded).
Spectrum dominantFrequency(const std::vector<double>& samples, double sample_rate);

}  // namespace aerobat::plot
