#pragma once

#include <stdexcept>
#include <string>

namespace aerobat {

/// Invalid parameters, geometry or configuration file contents.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite state or derivative encountered while marching in time.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double time)
        : std::runtime_error(what + " at t = " + std::to_string(time) + " s"), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

class DynamicsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ObserverDivergence : public std::runtime_error {
public:
    ObserverDivergence(double error_norm, double ceiling)
        : std::runtime_error("observer output error " + std::to_string(error_norm) + " exceeds ceiling " +
                             std::to_string(ceiling)),
          error_norm_(error_norm) {}
    double errorNorm() const { return error_norm_; }

private:
    double error_norm_;
};

class TuningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace aerobat
