#include "aerobat/estimate_control.hpp"

#include <algorithm>
#include <cmath>

namespace aerobat::control {

Mat18 errorDynamicsMatrix(const ObserverGains& gains, const Mat6& g3) {
    Mat18 m = Mat18::Zero();
    m.block<6, 6>(0, 0) = -gains.beta1;
    m.block<6, 6>(0, 6) = Mat6::Identity();
    m.block<6, 6>(6, 0) = -gains.beta2;
    m.block<6, 6>(6, 12) = g3;
    m.block<6, 6>(12, 0) = -gains.beta3;
    return m;
}

double spectralAbscissa(const ObserverGains& gains, const Mat6& g3) {
    return errorDynamicsMatrix(gains, g3).eigenvalues().real().maxCoeff();
}

ObserverGains makeObserverGains(const Mat6& beta1, const Mat6& beta2, const Mat6& beta3, const Mat6& g3) {
    ObserverGains gains{beta1, beta2, beta3};
    const double abscissa = spectralAbscissa(gains, g3);
    if (!(abscissa < 0))
        throw TuningError("observer error dynamics are not Hurwitz (max Re(lambda) = " + std::to_string(abscissa) + ")");
    return gains;
}

ObserverGains tuneObserver(double omega0, const Mat6& g3) {
    if (!(omega0 > 0)) throw TuningError("observer bandwidth must be positive");
    Eigen::FullPivLU<Mat6> lu(g3);
    if (!lu.isInvertible()) throw TuningError("disturbance input map g3 is not invertible");
    const Mat6 id = Mat6::Identity();
    return makeObserverGains(3.0 * omega0 * id, 3.0 * omega0 * omega0 * id, omega0 * omega0 * omega0 * lu.inverse(),
                             g3);
}

namespace {

Vec6 innovation(const Vec6& x1_hat, const Vec6& z) {
    Vec6 e = x1_hat - z;
    e(5) = wrapAngle(e(5));
    return e;
}

}  // namespace

ObserverDerivative observerDerivative(const ObserverState& obs, const Vec6& z, const Vec6& input,
                                      const PlantTerms& plant, const ObserverGains& gains) {
    const Vec6 e = innovation(obs.x1, z);
    return {obs.x2 - gains.beta1 * e, plant.g1 + plant.g2 * input + plant.g3 * obs.x3 - gains.beta2 * e,
            -gains.beta3 * e};
}

ObserverState observerStep(const ObserverState& obs, const Vec6& z, const Vec6& input, const PlantTerms& plant,
                           const ObserverGains& gains, double dt, double divergence_ceiling) {
    if (!(dt > 0)) throw ConfigError("observer step needs dt > 0");
    auto shifted = [&](const ObserverDerivative& d, double h) {
        return ObserverState{obs.x1 + h * d.x1, obs.x2 + h * d.x2, obs.x3 + h * d.x3};
    };
    const ObserverDerivative k1 = observerDerivative(obs, z, input, plant, gains);
    const ObserverDerivative k2 = observerDerivative(shifted(k1, dt / 2), z, input, plant, gains);
    const ObserverDerivative k3 = observerDerivative(shifted(k2, dt / 2), z, input, plant, gains);
    const ObserverDerivative k4 = observerDerivative(shifted(k3, dt), z, input, plant, gains);
    ObserverState out;
    out.x1 = obs.x1 + dt / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1);
    out.x2 = obs.x2 + dt / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2);
    out.x3 = obs.x3 + dt / 6.0 * (k1.x3 + 2.0 * k2.x3 + 2.0 * k3.x3 + k4.x3);
    out.x1(5) = wrapAngle(out.x1(5));
    const double err = innovation(out.x1, z).norm();
    if (!out.finite() || err > divergence_ceiling) throw ObserverDivergence(err, divergence_ceiling);
    return out;
}

Vec6 hoverSetpointError(const Vec6& x1, const Setpoint& setpoint) {
    Vec6 e;
    e.head<3>() = setpoint.position - x1.head<3>();
    e(3) = -x1(3);
    e(4) = -x1(4);
    e(5) = wrapAngle(setpoint.yaw - x1(5));
    return e;
}

ControllerConfig ControllerConfig::fromPoles(double position_pole, double attitude_pole) {
    if (!(position_pole > 0 && attitude_pole > 0)) throw TuningError("controller poles must be positive");
    ControllerConfig cfg;
    Vec6 kp, kd;
    kp << Vec3::Constant(position_pole * position_pole), Vec3::Constant(attitude_pole * attitude_pole);
    kd << Vec3::Constant(2.0 * position_pole), Vec3::Constant(2.0 * attitude_pole);
    cfg.kp = kp.asDiagonal();
    cfg.kd = kd.asDiagonal();
    return cfg;
}

double ControllerConfig::outerLoopAbscissa() const {
    Eigen::Matrix<double, 12, 12> a = Eigen::Matrix<double, 12, 12>::Zero();
    a.topRightCorner<6, 6>() = Mat6::Identity();
    a.bottomLeftCorner<6, 6>() = -kp;
    a.bottomRightCorner<6, 6>() = -kd;
    return a.eigenvalues().real().maxCoeff();
}

Vec6 outerLoop(const ControllerConfig& cfg, const Vec6& error, const Vec6& x2) { return cfg.kp * error - cfg.kd * x2; }

Vec6 cancellationLaw(const Vec6& u0, const PlantTerms& plant, const Vec6& x3_hat) {
    return plant.g2.partialPivLu().solve(u0 - plant.g1 - plant.g3 * x3_hat);
}

ControlResult ControlLaw::compute(const ObserverState& obs, const Vec6& error, const Vec6& x2,
                                  const PlantTerms& plant) {
    ControlResult r;
    r.u0 = outerLoop(cfg_, error, x2);
    Eigen::JacobiSVD<Mat6> svd(plant.g2);
    const auto& sv = svd.singularValues();
    const double cond = sv(5) > 0 ? sv(0) / sv(5) : std::numeric_limits<double>::infinity();
    if (!(cond < cfg_.g2_condition_limit)) {
        r.wrench = last_valid_;
        r.valid = false;
        return r;
    }
    r.wrench = cancellationLaw(r.u0, plant, obs.x3);
    if (!r.wrench.allFinite()) {
        r.wrench = last_valid_;
        r.valid = false;
        return r;
    }
    last_valid_ = r.wrench;
    return r;
}

Allocation allocate(const vehicle::BodyWrench& desired, const vehicle::GuardParams& params) {
    const vehicle::MixingMatrix m = mixingMatrix(params);
    const Eigen::Matrix4d mmt = m * m.transpose();
    Eigen::Vector4d w(desired.force, desired.moment.x(), desired.moment.y(), desired.moment.z());
    const vehicle::ThrusterCommand raw = m.transpose() * mmt.ldlt().solve(w);
    Allocation a;
    bool clamped = false;
    a.command = vehicle::saturate(raw, params, &clamped);
    a.achievable = !clamped;
    a.achieved = vehicle::thrusterMixing(a.command, params);
    return a;
}

GuardMeasurement measureGuard(const vehicle::GuardState& s) {
    const Euler q = rotationToEuler(s.attitude);
    GuardMeasurement m;
    m.x1 << s.position, q.vector();
    m.x2 << s.velocity, eulerRatesFromBodyOmega(q, s.omega);
    return m;
}

PlantTerms guardPlantTerms(const GuardMeasurement& m, const vehicle::GuardParams& params, double gravity) {
    const Euler q = Euler::fromVector(m.x1.tail<3>());
    const Vec3 qdot = m.x2.tail<3>();
    const Mat3 t = eulerRateMatrix(q);
    const Vec3 w = bodyOmegaFromEulerRates(q, qdot);
    const Mat3 j_inv = params.inertia.inverse();
    PlantTerms p;
    p.g1 << -gravity * Vec3::UnitZ(), eulerRateMatrixDot(q, qdot) * w - t * j_inv * w.cross(params.inertia * w);
    p.g2.setZero();
    p.g2.topLeftCorner<3, 3>() = Mat3::Identity() / params.mass;
    p.g2.bottomRightCorner<3, 3>() = t * j_inv;
    p.g3.setIdentity();
    return p;
}

Vec6 guardDisturbance(const GuardMeasurement& m, const Vec3& force_world, const Vec3& moment_body,
                      const vehicle::GuardParams& params) {
    const Euler q = Euler::fromVector(m.x1.tail<3>());
    Vec6 d;
    d << force_world / params.mass, eulerRateMatrix(q) * params.inertia.inverse() * moment_body;
    return d;
}

namespace {

// Roll and pitch that point the body z axis along the commanded force, yaw held at the setpoint.
Vec3 tiltReference(const Vec3& force, double yaw, double max_tilt) {
    Vec3 b3 = Vec3::UnitZ();
    if (force.z() > 1e-9) b3 = force.normalized();
    const double tilt = std::acos(std::clamp(b3.z(), -1.0, 1.0));
    if (tilt > max_tilt) {
        const Vec3 horizontal(b3.x(), b3.y(), 0.0);
        b3 = std::cos(max_tilt) * Vec3::UnitZ() + std::sin(max_tilt) * horizontal.normalized();
    }
    const Vec3 heading(std::cos(yaw), std::sin(yaw), 0.0);
    const Vec3 b2 = b3.cross(heading).normalized();
    const Vec3 b1 = b2.cross(b3);
    Mat3 r;
    r << b1, b2, b3;
    return rotationToEuler(r).vector();
}

}  // namespace

HoverController::HoverController(const HoverControllerConfig& cfg, const vehicle::GuardParams& guard, double gravity)
    : cfg_(cfg),
      guard_(guard),
      gravity_(gravity),
      gains_(tuneObserver(cfg.observer_bandwidth, Mat6::Identity())),
      law_([&] {
          ControllerConfig c = ControllerConfig::fromPoles(cfg.position_pole, cfg.attitude_pole);
          c.setpoint = cfg.setpoint;
          c.max_tilt = cfg.max_tilt;
          c.g2_condition_limit = cfg.g2_condition_limit;
          return c;
      }()) {}

void HoverController::reset(const GuardMeasurement& m) { obs_ = {m.x1, m.x2, Vec6::Zero()}; }

ControlTick HoverController::command(const GuardMeasurement& m) {
    const PlantTerms plant = guardPlantTerms(m, guard_, gravity_);
    const Vec6 base_error = hoverSetpointError(m.x1, cfg_.setpoint);

    ControlResult first = law_.compute(obs_, base_error, m.x2, plant);
    ControlTick tick;
    tick.tilt_reference = tiltReference(first.wrench.head<3>(), cfg_.setpoint.yaw, cfg_.max_tilt);
    Vec6 error = base_error;
    error(3) += tick.tilt_reference.x();
    error(4) += tick.tilt_reference.y();
    const ControlResult r = law_.compute(obs_, error, m.x2, plant);
    tick.desired_input = r.wrench;
    tick.fallback = !first.valid || !r.valid;

    const Vec3 body_z = eulerToRotation(Euler::fromVector(m.x1.tail<3>())).col(2);
    vehicle::BodyWrench desired;
    desired.force = r.wrench.head<3>().dot(body_z);
    desired.moment = r.wrench.tail<3>();
    const Allocation alloc = allocate(desired, guard_);
    tick.command = alloc.command;
    tick.achieved = alloc.achieved;
    tick.saturated = !alloc.achievable;
    tick.applied_input << body_z * alloc.achieved.force, alloc.achieved.moment;

    const auto lu = plant.g2.partialPivLu();
    tick.inertial_contribution = lu.solve(plant.g1);
    tick.aero_contribution = lu.solve(plant.g3 * obs_.x3);
    return tick;
}

void HoverController::advance(const GuardMeasurement& m, const Vec6& applied_input, double dt) {
    const PlantTerms plant = guardPlantTerms(m, guard_, gravity_);
    obs_ = observerStep(obs_, m.x1, applied_input, plant, gains_, dt, cfg_.divergence_ceiling);
}

}  // namespace aerobat::control
