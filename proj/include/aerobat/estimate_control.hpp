#pragma once

#include "aerobat/errors.hpp"
#include "aerobat/geom.hpp"
#include "aerobat/vehicle.hpp"

#include <limits>
#include <optional>

// Extended-state observer and feedback-linearizing hover control for the guard, written against
// the second-order abstraction
//   x1' = x2,  x2' = g1 + g2 v + g3 x3,  x3' = G(t),  z = x1
// with x1 = [p; roll, pitch, yaw] and v = [world force; body moment].
namespace aerobat::control {

using Vec18 = Eigen::Matrix<double, 18, 1>;
using Mat18 = Eigen::Matrix<double, 18, 18>;

struct PlantTerms {
    Vec6 g1{Vec6::Zero()};
    Mat6 g2{Mat6::Identity()};
    Mat6 g3{Mat6::Identity()};
};

struct ObserverState {
    Vec6 x1{Vec6::Zero()};
    Vec6 x2{Vec6::Zero()};
    Vec6 x3{Vec6::Zero()};

    bool finite() const { return x1.allFinite() && x2.allFinite() && x3.allFinite(); }
};

struct ObserverGains {
    Mat6 beta1{Mat6::Zero()};
    Mat6 beta2{Mat6::Zero()};
    Mat6 beta3{Mat6::Zero()};
};

/// Block matrix [-b1 I 0; -b2 0 g3; -b3 0 0] governing e = xhat - x.
Mat18 errorDynamicsMatrix(const ObserverGains& gains, const Mat6& g3);

/// Largest real part of the error-dynamics eigenvalues.
double spectralAbscissa(const ObserverGains& gains, const Mat6& g3);

/// Gains with the error dynamics checked Hurwitz; throws TuningError otherwise.
ObserverGains makeObserverGains(const Mat6& beta1, const Mat6& beta2, const Mat6& beta3, const Mat6& g3);

/// Bandwidth parameterization placing every error-dynamics eigenvalue at -omega0:
/// beta1 = 3 omega0 I, beta2 = 3 omega0^2 I, beta3 = omega0^3 g3^{-1}.
ObserverGains tuneObserver(double omega0, const Mat6& g3);

struct ObserverDerivative {
    Vec6 x1, x2, x3;
};

ObserverDerivative observerDerivative(const ObserverState& obs, const Vec6& z, const Vec6& input,
                                      const PlantTerms& plant, const ObserverGains& gains);

/// Advances the estimates by one RK4 step with z, input and plant terms held over dt. Throws
/// ObserverDivergence when |xhat1 - z| exceeds the ceiling.
ObserverState observerStep(const ObserverState& obs, const Vec6& z, const Vec6& input, const PlantTerms& plant,
                           const ObserverGains& gains, double dt,
                           double divergence_ceiling = std::numeric_limits<double>::infinity());

struct Setpoint {
    Vec3 position{0, 0, 1};
    double yaw{0};
};

/// Setpoint minus x1: position error, roll and pitch referenced to level, shortest-path yaw error.
Vec6 hoverSetpointError(const Vec6& x1, const Setpoint& setpoint);

struct ControllerConfig {
    Mat6 kp{Mat6::Zero()};
    Mat6 kd{Mat6::Zero()};
    Setpoint setpoint{};
    double g2_condition_limit{1e8};
    double max_tilt{0.5};  // rad, tilt reference limit in the hover cascade

    /// Critically damped double poles at -position_pole (translation) and -attitude_pole (rotation).
    static ControllerConfig fromPoles(double position_pole, double attitude_pole);
    /// Max real part of the outer-loop closed-loop poles of x'' = -kd x' - kp x.
    double outerLoopAbscissa() const;
};

/// u0 = kp * error - kd * x2.
Vec6 outerLoop(const ControllerConfig& cfg, const Vec6& error, const Vec6& x2);

/// v = g2^{-1} (u0 - g1 - g3 xhat3).
Vec6 cancellationLaw(const Vec6& u0, const PlantTerms& plant, const Vec6& x3_hat);

struct ControlResult {
    Vec6 wrench{Vec6::Zero()};
    Vec6 u0{Vec6::Zero()};
    bool valid{true};  // false when g2 was ill-conditioned and the previous command was reused
};

/// Cancellation law with a fallback to the last valid command when g2 is ill-conditioned.
class ControlLaw {
public:
    explicit ControlLaw(ControllerConfig cfg) : cfg_(std::move(cfg)) {}

    /// error is reference - x1 (see hoverSetpointError).
    ControlResult compute(const ObserverState& obs, const Vec6& error, const Vec6& x2, const PlantTerms& plant);

    const ControllerConfig& config() const { return cfg_; }

private:
    ControllerConfig cfg_;
    Vec6 last_valid_{Vec6::Zero()};
};

struct Allocation {
    vehicle::ThrusterCommand command{vehicle::ThrusterCommand::Zero()};
    vehicle::BodyWrench achieved{};
    bool achievable{true};  // false when any thruster had to be clamped
};

/// Minimum-norm thruster forces for (f, m) followed by per-thruster clamping.
Allocation allocate(const vehicle::BodyWrench& desired, const vehicle::GuardParams& params);

// ---------------------------------------------------------------------------------------------
// Guard abstraction.

struct GuardMeasurement {
    Vec6 x1;  // position, Euler angles
    Vec6 x2;  // velocity, Euler rates
};

GuardMeasurement measureGuard(const vehicle::GuardState& s);

/// g1 = [-g e3; Tdot w - T J^{-1} (w x J w)], g2 = blockdiag(I / m, T J^{-1}), g3 = I.
PlantTerms guardPlantTerms(const GuardMeasurement& m, const vehicle::GuardParams& params,
                           double gravity = vehicle::kGravity);

/// Generalized acceleration produced by an external world force and body moment: [F / m; T J^{-1} M].
Vec6 guardDisturbance(const GuardMeasurement& m, const Vec3& force_world, const Vec3& moment_body,
                      const vehicle::GuardParams& params);

struct HoverControllerConfig {
    double observer_bandwidth{10.0};
    double position_pole{2.0};
    double attitude_pole{8.0};
    Setpoint setpoint{};
    double max_tilt{0.5};
    double divergence_ceiling{1.0};
    double g2_condition_limit{1e8};
};

struct ControlTick {
    vehicle::ThrusterCommand command{vehicle::ThrusterCommand::Zero()};
    vehicle::BodyWrench achieved{};
    Vec6 applied_input{Vec6::Zero()};  // [world force; body moment] actually produced by the thrusters
    Vec6 desired_input{Vec6::Zero()};
    Vec3 tilt_reference{Vec3::Zero()};
    Vec6 inertial_contribution{Vec6::Zero()};  // g2^{-1} g1
    Vec6 aero_contribution{Vec6::Zero()};      // g2^{-1} g3 xhat3
    bool saturated{false};
    bool fallback{false};
};

/// Observer plus cascaded cancellation law: the translational part of the commanded wrench sets the
/// roll/pitch reference, the rotational part tracks it, and the result is allocated to the thrusters.
class HoverController {
public:
    HoverController(const HoverControllerConfig& cfg, const vehicle::GuardParams& guard, double gravity);

    void reset(const GuardMeasurement& m);

    /// Computes the command for this tick from the current estimates.
    ControlTick command(const GuardMeasurement& m);

    /// Propagates the estimates over one control period with the applied input held.
    void advance(const GuardMeasurement& m, const Vec6& applied_input, double dt);

    const ObserverState& estimate() const { return obs_; }
    const ObserverGains& gains() const { return gains_; }
    const HoverControllerConfig& config() const { return cfg_; }

private:
    HoverControllerConfig cfg_;
    vehicle::GuardParams guard_;
    double gravity_;
    ObserverGains gains_;
    ControlLaw law_;
    ObserverState obs_;
};

}  // namespace aerobat::control
