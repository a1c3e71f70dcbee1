#pragma once

#include "aerobat/aero.hpp"
#include "aerobat/errors.hpp"
#include "aerobat/estimate_control.hpp"
#include "aerobat/geom.hpp"
#include "aerobat/vehicle.hpp"

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace aerobat::sim {

using Eigen::VectorXd;

inline constexpr double kDeg = std::numbers::pi / 180.0;
inline constexpr double kFlapLimit = std::numbers::pi / 2;
inline constexpr double kFoldLimit = std::numbers::pi / 2;

struct GaitParams {
    double frequency{5.0};                // Hz
    double proximal_amplitude{35 * kDeg};
    double fold_amplitude{45 * kDeg};
    double fold_phase{std::numbers::pi / 2};
    double proximal_mean{0.0};
    double fold_mean{45 * kDeg};

    void validate() const;
};

/// alpha_3 = mean + A_p sin(2 pi f t), alpha_4 = mean + A_d sin(2 pi f t + phi), with exact derivatives.
vehicle::WingJoints gait(double t, const GaitParams& p);

/// Classical fourth-order Runge-Kutta step of x' = f(t, x). Throws IntegrationError stamped with the
/// stage time when a derivative is not finite.
template <typename Vector, typename F>
Vector rk4Step(const Vector& x, double t, double dt, F&& f) {
    if (!(dt > 0)) throw ConfigError("integration step needs dt > 0");
    auto checked = [&](double ts, const Vector& xs) {
        Vector d = f(ts, xs);
        if (!d.allFinite()) throw IntegrationError("non-finite state derivative", ts);
        return d;
    };
    const double h2 = 0.5 * dt;
    const Vector k1 = checked(t, x);
    const Vector k2 = checked(t + h2, Vector(x + h2 * k1));
    const Vector k3 = checked(t + h2, Vector(x + h2 * k2));
    const Vector k4 = checked(t + dt, Vector(x + dt * k3));
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct ForceSwitches {
    bool gravity{true};
    bool thrusters{true};
    bool aero{true};
    bool bands{true};
};

struct AeroModelParams {
    int strips{8};
    int order{8};
    double root_chord{0.08};
    aero::WagnerCoefficients wagner{};
    aero::LagInputVariant lag_input{aero::LagInputVariant::Autonomous};
    aero::AeroParams air{};
};

/// Offsets from the hover setpoint. The Aerobat starts at band equilibrium plus aerobat_offset (world).
struct InitialConditions {
    Vec3 position_offset{0.05, -0.05, 0.05};
    Vec3 attitude_offset{5 * kDeg, -5 * kDeg, 5 * kDeg};  // roll, pitch, yaw
    Vec3 velocity{Vec3::Zero()};
    Vec3 omega{Vec3::Zero()};
    Vec3 aerobat_offset{Vec3::Zero()};
};

struct SensorNoise {
    double position_sigma{0.0};  // applied to x1
    double rate_sigma{0.0};      // applied to x2
};

struct SimConfig {
    double dt_plant{1e-4};
    double control_rate{500.0};
    double duration{10.0};
    double metrics_window{5.0};
    std::uint64_t seed{1};
    GaitParams gait{};
    AeroModelParams aero{};
    vehicle::GuardParams guard{};
    vehicle::AerobatParams aerobat{};
    control::HoverControllerConfig controller{};
    ForceSwitches forces{};
    InitialConditions initial{};
    SensorNoise sensor{};
    std::string output_dir{"out"};
    std::string csv_name{"trajectory.csv"};
    std::string metadata_name{"metadata.json"};

    double gravity() const { return forces.gravity ? vehicle::kGravity : 0.0; }
    double controlPeriod() const { return 1.0 / control_rate; }
    int substeps() const;  // plant steps per control period
    int ticks() const;     // control periods in the run
    void validate() const;
};

struct CoupledState {
    vehicle::GuardState guard;
    vehicle::AerobatBodyState aerobat;
    aero::AeroState wing_right;
    aero::AeroState wing_left;

    static constexpr int kRigidSize = 18;
    VectorXd pack() const;
    static CoupledState unpack(const VectorXd& x, int order, int strips);
};

struct EnergyBreakdown {
    double kinetic{0};
    double band{0};
    double gravity{0};
    double total() const { return kinetic + band + gravity; }
};

struct Diagnostics {
    vehicle::WingJoints joints;
    aero::StripForces right;
    aero::StripForces left;
    vehicle::ElasticWrench bands;
    vehicle::BodyWrench thrust;  // thrusters only
    Vec3 aero_force{Vec3::Zero()};
};

/// Aerodynamic state of one wing at one instant.
struct WingAero {
    VectorXd effective_flow;
    VectorXd beta;
    aero::AeroDerivative rate;
    aero::StripForces forces;
    Vec6 generalized{Vec6::Zero()};  // load on the Aerobat speeds
};

/// Plant: guard, floating-base Aerobat with prescribed wing joints, two unsteady-aerodynamic wings and bands.
class CoupledModel {
public:
    explicit CoupledModel(const SimConfig& cfg);

    VectorXd derivative(double t, const VectorXd& x, const vehicle::ThrusterCommand& u,
                        Diagnostics* diag = nullptr) const;
    /// RK4 step followed by re-orthonormalization of both attitudes.
    CoupledState step(const CoupledState& s, double t, double dt, const vehicle::ThrusterCommand& u) const;
    Diagnostics diagnostics(double t, const CoupledState& s, const vehicle::ThrusterCommand& u) const;
    EnergyBreakdown energy(double t, const CoupledState& s) const;
    CoupledState initialState() const;
    WingAero wingAero(vehicle::Side side, double t, const CoupledState& s) const;

    const aero::StripGeometry& strips() const { return geom_; }
    const aero::AeroSystemMatrices& aeroSystem() const { return sys_; }
    const SimConfig& config() const { return cfg_; }

private:
    WingAero wing(vehicle::Side side, double t, const vehicle::AerobatBodyState& body,
                  const vehicle::WingJoints& joints, const aero::AeroState& xi) const;

    SimConfig cfg_;
    aero::StripGeometry geom_;
    aero::AeroSystemMatrices sys_;
};

/// Fixed-schema trajectory log, one row per control tick.
struct TrajectoryLog {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const;  // throws std::out_of_range
    std::vector<double> series(const std::string& name) const;
};

std::vector<std::string> logColumns(int strips);

struct Metrics {
    double rms_position_error{0};  // m, over the metrics window
    double max_attitude_error{0};  // rad, over the metrics window
    double saturation_fraction{0};
    double max_observer_error{0};      // max |xhat1 - x1|
    double final_disturbance_error{0}; // |xhat3 - x3| on the last row
    double max_rotation_error{0};      // max |R^T R - I| over logged rows
    int ticks{0};
};

struct Failure {
    std::string kind;  // "integration" | "observer-divergence" | "dynamics"
    std::string message;
    double time{0};
};

struct ScenarioResult {
    TrajectoryLog log;
    Metrics metrics;
    std::optional<Failure> failure;
    bool ok() const { return !failure.has_value(); }
};

ScenarioResult runScenario(const SimConfig& cfg);

Metrics computeMetrics(const TrajectoryLog& log, const SimConfig& cfg);

struct AuditResult {
    double max_drift{0};  // max |E(t) - E(0)| / scale
    double scale{0};      // max over the run of kinetic + band energy
    double initial_energy{0};
    int steps{0};
};

/// Integrates the plant with thrusters and aerodynamics off and a static gait and tracks total energy.
AuditResult passiveEnergyAudit(const SimConfig& cfg);

}  // namespace aerobat::sim
