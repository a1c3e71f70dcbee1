#include "aerobat/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace aerobat::sim {

using vehicle::Side;

void GaitParams::validate() const {
    if (!(frequency > 0)) throw ConfigError("gait frequency must be positive");
    if (proximal_amplitude < 0 || fold_amplitude < 0) throw ConfigError("gait amplitudes must be non-negative");
    if (std::abs(proximal_mean) + proximal_amplitude > kFlapLimit)
        throw ConfigError("flap trajectory exceeds the joint limit of " + std::to_string(kFlapLimit) + " rad");
    if (std::abs(fold_mean) + fold_amplitude > kFoldLimit + 1e-12)
        throw ConfigError("fold trajectory exceeds the joint limit of " + std::to_string(kFoldLimit) + " rad");
}

vehicle::WingJoints gait(double t, const GaitParams& p) {
    const double w = 2.0 * std::numbers::pi * p.frequency;
    const double a = w * t;
    const double b = a + p.fold_phase;
    vehicle::WingJoints j;
    j.angle << p.proximal_mean + p.proximal_amplitude * std::sin(a), p.fold_mean + p.fold_amplitude * std::sin(b);
    j.rate << p.proximal_amplitude * w * std::cos(a), p.fold_amplitude * w * std::cos(b);
    j.accel << -p.proximal_amplitude * w * w * std::sin(a), -p.fold_amplitude * w * w * std::sin(b);
    return j;
}

int SimConfig::substeps() const {
    const double ratio = controlPeriod() / dt_plant;
    const double n = std::round(ratio);
    if (n < 1 || std::abs(ratio - n) > 1e-9 * n)
        throw ConfigError("dt_plant = " + std::to_string(dt_plant) + " does not divide the control period " +
                          std::to_string(controlPeriod()));
    return static_cast<int>(n);
}

int SimConfig::ticks() const {
    const double ratio = duration * control_rate;
    const double n = std::round(ratio);
    if (std::abs(ratio - n) > 1e-9 * std::max(1.0, n))
        throw ConfigError("duration must be a whole number of control periods");
    return static_cast<int>(n);
}

void SimConfig::validate() const {
    if (!(dt_plant > 0)) throw ConfigError("dt_plant must be positive");
    if (!(control_rate > 0)) throw ConfigError("control rate must be positive");
    if (!(duration > 0)) throw ConfigError("duration must be positive");
    if (!(metrics_window > 0 && metrics_window <= duration))
        throw ConfigError("metrics window must lie in (0, duration]");
    substeps();
    ticks();
    gait.validate();
    guard.validate();
    aerobat.validate();
    if (aero.strips < 1 || aero.order < 1) throw ConfigError("aero strips and order must be positive");
    if (!(aero.root_chord > 0)) throw ConfigError("root chord must be positive");
    if (!(aero.air.air_density >= 0)) throw ConfigError("air density must be non-negative");
    if (sensor.position_sigma < 0 || sensor.rate_sigma < 0) throw ConfigError("sensor noise must be non-negative");
    if (!(controller.divergence_ceiling > 0)) throw ConfigError("divergence ceiling must be positive");
    if (!(controller.max_tilt > 0 && controller.max_tilt < std::numbers::pi / 2))
        throw ConfigError("max tilt must lie in (0, pi/2)");
}

namespace {

constexpr int kRigid = CoupledState::kRigidSize;

void packRigid(VectorXd& x, int at, const Vec3& p, const Mat3& r, const Vec3& v, const Vec3& w) {
    x.segment<3>(at) = p;
    x.segment<9>(at + 3) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(r.data());
    x.segment<3>(at + 12) = v;
    x.segment<3>(at + 15) = w;
}

template <typename Body>
void unpackRigid(const VectorXd& x, int at, Body& b) {
    b.position = x.segment<3>(at);
    b.attitude = Eigen::Map<const Mat3>(x.data() + at + 3);
    b.velocity = x.segment<3>(at + 12);
    b.omega = x.segment<3>(at + 15);
}

double rotationError(const Mat3& r) { return (r.transpose() * r - Mat3::Identity()).norm(); }

}  // namespace

VectorXd CoupledState::pack() const {
    const Eigen::Index n = wing_right.a.size() + wing_right.z.size();
    VectorXd x(2 * kRigid + 2 * n);
    packRigid(x, 0, guard.position, guard.attitude, guard.velocity, guard.omega);
    packRigid(x, kRigid, aerobat.position, aerobat.attitude, aerobat.velocity, aerobat.omega);
    x.segment(2 * kRigid, n) = wing_right.packed();
    x.segment(2 * kRigid + n, n) = wing_left.packed();
    return x;
}

CoupledState CoupledState::unpack(const VectorXd& x, int order, int strips) {
    const int n = order + 2 * strips;
    if (x.size() != 2 * kRigid + 2 * n) throw std::invalid_argument("coupled state has the wrong size");
    CoupledState s;
    unpackRigid(x, 0, s.guard);
    unpackRigid(x, kRigid, s.aerobat);
    s.wing_right = aero::AeroState::unpack(x.segment(2 * kRigid, n), order, strips);
    s.wing_left = aero::AeroState::unpack(x.segment(2 * kRigid + n, n), order, strips);
    return s;
}

CoupledModel::CoupledModel(const SimConfig& cfg)
    : cfg_(cfg),
      geom_(aero::buildStrips(cfg.aero.strips, cfg.aerobat.semiSpan(),
                              aero::ellipticChord(cfg.aero.root_chord, cfg.aerobat.semiSpan()))),
      sys_(aero::assembleSystem(geom_, cfg.aero.wagner, cfg.aero.order, cfg.aero.lag_input)) {}

WingAero CoupledModel::wing(Side side, double t, const vehicle::AerobatBodyState& body,
                            const vehicle::WingJoints& joints, const aero::AeroState& xi) const {
    const std::vector<vehicle::StripPoint> pts = vehicle::stripPoints(cfg_.aerobat, joints, geom_, side);
    const int m = geom_.count();
    std::vector<aero::StripFlow> flows(m);
    VectorXd y1(m);
    for (int i = 0; i < m; ++i) {
        aero::StripFlow& f = flows[i];
        f.relative_air = -vehicle::stripWorldVelocity(body, pts[i], joints);
        f.normal = body.attitude * pts[i].normal;
        f.span_axis = body.attitude * pts[i].span_axis;
        f.forward = body.attitude.col(0);
        y1(i) = aero::normalFlow(f);
    }
    WingAero w;
    w.effective_flow = y1 + sys_.induced * xi.a;
    w.rate = aero::aeroDerivative(xi, w.effective_flow, sys_, t);
    w.beta = aero::stripBeta(xi, w.effective_flow, sys_);
    w.forces = aero::stripForces(w.beta, flows, geom_, cfg_.aero.air);
    for (int i = 0; i < m; ++i) w.generalized += vehicle::generalizedForce(body, pts[i].position, w.forces.force[i]);
    return w;
}

WingAero CoupledModel::wingAero(Side side, double t, const CoupledState& s) const {
    return wing(side, t, s.aerobat, gait(t, cfg_.gait), side == Side::Right ? s.wing_right : s.wing_left);
}

VectorXd CoupledModel::derivative(double t, const VectorXd& x, const vehicle::ThrusterCommand& u,
                                  Diagnostics* diag) const {
    const int order = sys_.order, strips = sys_.strips;
    const int n = order + 2 * strips;
    const CoupledState s = CoupledState::unpack(x, order, strips);
    const double g = cfg_.gravity();
    const vehicle::WingJoints joints = gait(t, cfg_.gait);

    vehicle::ElasticWrench bands;
    if (cfg_.forces.bands) bands = vehicle::elasticWrench(s.guard, s.aerobat, cfg_.aerobat);
    Vec3 lateral = Vec3::Zero();
    const vehicle::BodyWrench elastic = bands.guardBodyWrench(s.guard.attitude, &lateral);
    const vehicle::ThrusterCommand applied = cfg_.forces.thrusters ? u : vehicle::ThrusterCommand::Zero();
    const vehicle::BodyWrench wrench = vehicle::thrusterMixing(applied, cfg_.guard, elastic);
    const vehicle::GuardDerivative gd = vehicle::guardDerivatives(s.guard, wrench, cfg_.guard, lateral, g);

    Vec6 q = bands.generalized_aerobat;
    VectorXd dx = VectorXd::Zero(x.size());
    if (cfg_.forces.aero) {
        WingAero right = wing(Side::Right, t, s.aerobat, joints, s.wing_right);
        WingAero left = wing(Side::Left, t, s.aerobat, joints, s.wing_left);
        q += right.generalized + left.generalized;
        dx.segment(2 * kRigid, order) = right.rate.a_dot;
        dx.segment(2 * kRigid + order, 2 * strips) = right.rate.z_dot;
        dx.segment(2 * kRigid + n, order) = left.rate.a_dot;
        dx.segment(2 * kRigid + n + order, 2 * strips) = left.rate.z_dot;
        if (diag) {
            diag->aero_force = (right.generalized + left.generalized).head<3>();
            diag->right = std::move(right.forces);
            diag->left = std::move(left.forces);
        }
    }
    const Vec6 nu_dot = vehicle::aerobatDerivatives(s.aerobat, joints, q, cfg_.aerobat, g);

    const Mat3 guard_rate = gd.attitude_rate;
    const Mat3 body_rate = s.aerobat.attitude * hat(s.aerobat.omega);
    packRigid(dx, 0, gd.velocity, guard_rate, gd.acceleration, gd.omega_rate);
    packRigid(dx, kRigid, s.aerobat.velocity, body_rate, nu_dot.head<3>(), nu_dot.tail<3>());

    if (diag) {
        diag->joints = joints;
        diag->bands = bands;
        diag->thrust = vehicle::thrusterMixing(applied, cfg_.guard);
    }
    return dx;
}

CoupledState CoupledModel::step(const CoupledState& s, double t, double dt, const vehicle::ThrusterCommand& u) const {
    const VectorXd x = rk4Step(s.pack(), t, dt, [&](double ts, const VectorXd& xs) { return derivative(ts, xs, u); });
    CoupledState out = CoupledState::unpack(x, sys_.order, sys_.strips);
    out.guard.attitude = orthonormalize(out.guard.attitude);
    out.aerobat.attitude = orthonormalize(out.aerobat.attitude);
    return out;
}

Diagnostics CoupledModel::diagnostics(double t, const CoupledState& s, const vehicle::ThrusterCommand& u) const {
    Diagnostics d;
    d.right.total.setZero();
    d.left.total.setZero();
    const int m = sys_.strips;
    for (aero::StripForces* f : {&d.right, &d.left}) {
        f->force.assign(m, Vec3::Zero());
        f->thrust = VectorXd::Zero(m);
        f->lift = VectorXd::Zero(m);
        f->drag = VectorXd::Zero(m);
    }
    derivative(t, s.pack(), u, &d);
    return d;
}

EnergyBreakdown CoupledModel::energy(double t, const CoupledState& s) const {
    const vehicle::WingJoints joints = gait(t, cfg_.gait);
    const double g = cfg_.gravity();
    EnergyBreakdown e;
    e.kinetic = vehicle::guardKineticEnergy(s.guard, cfg_.guard) +
                vehicle::aerobatKineticEnergy(s.aerobat, joints, cfg_.aerobat);
    if (cfg_.forces.bands) e.band = vehicle::elasticWrench(s.guard, s.aerobat, cfg_.aerobat).energy;
    e.gravity = cfg_.guard.mass * g * s.guard.position.z() +
                vehicle::aerobatGravityEnergy(s.aerobat, joints, cfg_.aerobat, g);
    return e;
}

CoupledState CoupledModel::initialState() const {
    const InitialConditions& ic = cfg_.initial;
    const control::Setpoint& sp = cfg_.controller.setpoint;
    CoupledState s;
    s.guard.position = sp.position + ic.position_offset;
    s.guard.attitude = eulerToRotation(Euler{ic.attitude_offset.x(), ic.attitude_offset.y(), sp.yaw + ic.attitude_offset.z()});
    s.guard.velocity = ic.velocity;
    s.guard.omega = ic.omega;

    s.aerobat.attitude = s.guard.attitude;
    s.aerobat.position = vehicle::bandEquilibrium(s.guard, s.aerobat.attitude, cfg_.aerobat, cfg_.gravity()) +
                         ic.aerobat_offset;
    const Vec3 arm = s.aerobat.position - s.guard.position;
    s.aerobat.velocity = s.guard.velocity + (s.guard.attitude * s.guard.omega).cross(arm);
    s.aerobat.omega = s.guard.omega;
    s.wing_right = aero::AeroState::zero(sys_);
    s.wing_left = aero::AeroState::zero(sys_);
    return s;
}

// ---------------------------------------------------------------------------------------------

int TrajectoryLog::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("no log column named '" + name + "'");
    return static_cast<int>(it - columns.begin());
}

std::vector<double> TrajectoryLog::series(const std::string& name) const {
    const int c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

namespace {

const std::array<const char*, 6> kChannels{"x", "y", "z", "roll", "pitch", "yaw"};

void addChannels(std::vector<std::string>& cols, const std::string& prefix) {
    for (const char* c : kChannels) cols.push_back(prefix + c);
}

}  // namespace

std::vector<std::string> logColumns(int strips) {
    std::vector<std::string> c{"t"};
    addChannels(c, "");
    for (const char* v : {"vx", "vy", "vz", "wx", "wy", "wz"}) c.emplace_back(v);
    addChannels(c, "sp_");
    addChannels(c, "rel_");
    for (const char* v : {"alpha3", "alpha4"}) c.emplace_back(v);
    addChannels(c, "rel_d");
    for (const char* v : {"alpha3_rate", "alpha4_rate"}) c.emplace_back(v);
    for (const char* side : {"r", "l"}) {
        for (int k = 0; k < strips; ++k) c.push_back(std::string("a_") + side + "_" + std::to_string(k + 1));
        for (int i = 0; i < strips; ++i)
            for (int k = 1; k <= 2; ++k)
                c.push_back(std::string("z") + std::to_string(k) + "_" + side + "_" + std::to_string(i + 1));
    }
    addChannels(c, "xhat1_");
    addChannels(c, "xhat2_");
    addChannels(c, "xhat3_");
    addChannels(c, "x3_");
    for (int i = 1; i <= 6; ++i) c.push_back("u" + std::to_string(i));
    for (const char* v : {"thrust_f", "thrust_mx", "thrust_my", "thrust_mz", "saturated", "fallback"}) c.emplace_back(v);
    addChannels(c, "inertial_");
    addChannels(c, "aero_");
    for (const char* v : {"aero_fx", "aero_fy", "aero_fz"}) c.emplace_back(v);
    for (const char* side : {"r", "l"})
        for (int i = 0; i < strips; ++i)
            for (const char* q : {"T", "L", "D"}) c.push_back(std::string(q) + "_" + side + "_" + std::to_string(i + 1));
    for (const char* v : {"energy_kinetic", "energy_band", "energy_gravity", "energy_total", "rotation_error"})
        c.emplace_back(v);
    return c;
}

namespace {

void append(std::vector<double>& row, const Eigen::Ref<const VectorXd>& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
}

std::vector<double> makeRow(double t, const CoupledModel& model, const CoupledState& s,
                            const control::GuardMeasurement& truth, const control::HoverController& ctl,
                            const control::ControlTick& tick, const vehicle::ThrusterCommand& u) {
    const SimConfig& cfg = model.config();
    const int m = model.aeroSystem().strips;
    std::vector<double> row;
    row.reserve(logColumns(m).size());
    row.push_back(t);
    append(row, truth.x1);
    append(row, s.guard.velocity);
    append(row, s.guard.omega);
    const control::Setpoint& sp = cfg.controller.setpoint;
    append(row, sp.position);
    append(row, Vec3(0, 0, sp.yaw));

    const Diagnostics diag = model.diagnostics(t, s, u);
    const vehicle::AerobatRelState rel = vehicle::relativeState(s.guard, s.aerobat, diag.joints);
    append(row, rel.position);
    append(row, rel.attitude.vector());
    append(row, rel.wings);
    append(row, rel.velocity);
    append(row, rel.euler_rates);
    append(row, rel.wing_rates);
    append(row, s.wing_right.packed());
    append(row, s.wing_left.packed());

    const control::ObserverState& obs = ctl.estimate();
    append(row, obs.x1);
    append(row, obs.x2);
    append(row, obs.x3);
    append(row, control::guardDisturbance(truth, diag.bands.force_on_guard, diag.bands.moment_on_guard, cfg.guard));
    append(row, u);
    row.push_back(diag.thrust.force);
    append(row, diag.thrust.moment);
    row.push_back(tick.saturated ? 1.0 : 0.0);
    row.push_back(tick.fallback ? 1.0 : 0.0);
    append(row, tick.inertial_contribution);
    append(row, tick.aero_contribution);
    append(row, diag.aero_force);
    for (const aero::StripForces* f : {&diag.right, &diag.left})
        for (int i = 0; i < m; ++i) {
            row.push_back(f->thrust(i));
            row.push_back(f->lift(i));
            row.push_back(f->drag(i));
        }
    const EnergyBreakdown e = model.energy(t, s);
    row.push_back(e.kinetic);
    row.push_back(e.band);
    row.push_back(e.gravity);
    row.push_back(e.total());
    row.push_back(std::max(rotationError(s.guard.attitude), rotationError(s.aerobat.attitude)));
    return row;
}

}  // namespace

ScenarioResult runScenario(const SimConfig& cfg) {
    cfg.validate();
    const CoupledModel model(cfg);
    control::HoverController ctl(cfg.controller, cfg.guard, cfg.gravity());
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    ScenarioResult result;
    result.log.columns = logColumns(cfg.aero.strips);
    const int ticks = cfg.ticks();
    const int sub = cfg.substeps();
    const double period = cfg.controlPeriod();
    const double h = cfg.dt_plant;
    result.log.rows.reserve(ticks + 1);

    CoupledState state = model.initialState();
    double t = 0;
    try {
        for (int k = 0; k <= ticks; ++k) {
            t = k * period;
            const control::GuardMeasurement truth = control::measureGuard(state.guard);
            control::GuardMeasurement meas = truth;
            if (cfg.sensor.position_sigma > 0)
                for (int i = 0; i < 6; ++i) meas.x1(i) += cfg.sensor.position_sigma * normal(rng);
            if (cfg.sensor.rate_sigma > 0)
                for (int i = 0; i < 6; ++i) meas.x2(i) += cfg.sensor.rate_sigma * normal(rng);
            if (k == 0) ctl.reset(meas);

            const control::ControlTick tick = ctl.command(meas);
            const vehicle::ThrusterCommand u =
                cfg.forces.thrusters ? tick.command : vehicle::ThrusterCommand::Zero();
            const Vec6 applied = cfg.forces.thrusters ? tick.applied_input : Vec6::Zero();
            result.log.rows.push_back(makeRow(t, model, state, truth, ctl, tick, u));
            if (k == ticks) break;

            for (int j = 0; j < sub; ++j) state = model.step(state, t + j * h, h, u);
            ctl.advance(meas, applied, period);
        }
    } catch (const IntegrationError& e) {
        result.failure = Failure{"integration", e.what(), e.time()};
    } catch (const ObserverDivergence& e) {
        result.failure = Failure{"observer-divergence", e.what(), t + period};
    } catch (const DynamicsError& e) {
        result.failure = Failure{"dynamics", e.what(), t};
    }
    result.metrics = computeMetrics(result.log, cfg);
    return result;
}

Metrics computeMetrics(const TrajectoryLog& log, const SimConfig& cfg) {
    Metrics m;
    m.ticks = static_cast<int>(log.rows.size());
    if (log.rows.empty()) return m;
    const int t = log.column("t"), x = log.column("x"), sx = log.column("sp_x");
    const int roll = log.column("roll"), yaw = log.column("yaw"), syaw = log.column("sp_yaw");
    const int xh = log.column("xhat1_x"), x3h = log.column("xhat3_x"), x3 = log.column("x3_x");
    const int sat = log.column("saturated"), rot = log.column("rotation_error");
    const double window_start = cfg.duration - cfg.metrics_window - 1e-9;

    double sq = 0;
    int in_window = 0, saturated = 0;
    for (const auto& r : log.rows) {
        Vec6 obs_err;
        for (int i = 0; i < 6; ++i) obs_err(i) = r[xh + i] - r[x + i];
        obs_err(5) = wrapAngle(obs_err(5));
        m.max_observer_error = std::max(m.max_observer_error, obs_err.norm());
        m.max_rotation_error = std::max(m.max_rotation_error, r[rot]);
        if (r[sat] != 0) ++saturated;
        if (r[t] < window_start) continue;
        ++in_window;
        Vec3 dp(r[x] - r[sx], r[x + 1] - r[sx + 1], r[x + 2] - r[sx + 2]);
        sq += dp.squaredNorm();
        const double att = std::max({std::abs(r[roll]), std::abs(r[roll + 1]), std::abs(wrapAngle(r[yaw] - r[syaw]))});
        m.max_attitude_error = std::max(m.max_attitude_error, att);
    }
    m.rms_position_error = in_window > 0 ? std::sqrt(sq / in_window) : 0.0;
    m.saturation_fraction = static_cast<double>(saturated) / static_cast<double>(log.rows.size());
    const auto& last = log.rows.back();
    Vec6 d;
    for (int i = 0; i < 6; ++i) d(i) = last[x3h + i] - last[x3 + i];
    m.final_disturbance_error = d.norm();
    return m;
}

AuditResult passiveEnergyAudit(const SimConfig& cfg) {
    if (cfg.forces.thrusters || cfg.forces.aero)
        throw ConfigError("energy audit requires thrusters and aerodynamics disabled");
    if (cfg.gait.proximal_amplitude != 0 || cfg.gait.fold_amplitude != 0)
        throw ConfigError("energy audit requires a static gait (zero amplitudes)");
    if (cfg.aerobat.band_damping != 0) throw ConfigError("energy audit requires band damping disabled");
    if (!(cfg.dt_plant > 0 && cfg.duration > 0)) throw ConfigError("energy audit needs positive dt and duration");
    cfg.gait.validate();
    const CoupledModel model(cfg);
    const vehicle::ThrusterCommand u = vehicle::ThrusterCommand::Zero();
    const int steps = static_cast<int>(std::llround(cfg.duration / cfg.dt_plant));

    CoupledState s = model.initialState();
    EnergyBreakdown e = model.energy(0.0, s);
    AuditResult out;
    out.initial_energy = e.total();
    out.scale = e.kinetic + e.band;
    double max_dev = 0;
    for (int k = 0; k < steps; ++k) {
        s = model.step(s, k * cfg.dt_plant, cfg.dt_plant, u);
        e = model.energy((k + 1) * cfg.dt_plant, s);
        max_dev = std::max(max_dev, std::abs(e.total() - out.initial_energy));
        out.scale = std::max(out.scale, e.kinetic + e.band);
    }
    out.steps = steps;
    out.max_drift = out.scale > 0 ? max_dev / out.scale : 0.0;
    return out;
}

}  // namespace aerobat::sim
