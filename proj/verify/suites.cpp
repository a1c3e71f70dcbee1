#include "aerobat/verify.hpp"

#include "aerobat/estimate_control.hpp"
#include "aerobat/io.hpp"
#include "aerobat/oracle.hpp"
#include "aerobat/plotdata.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>

namespace aerobat::verify {

using Eigen::VectorXd;

bool SuiteReport::passed() const {
    for (const Check& c : checks)
        if (!c.passed) return false;
    return true;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

Check below(int criterion, std::string name, double measured, double limit, std::string note = {}) {
    return {criterion, std::move(name), measured, "<", limit, measured < limit, std::move(note)};
}

Check atLeast(int criterion, std::string name, double measured, double limit, std::string note = {}) {
    return {criterion, std::move(name), measured, ">=", limit, measured >= limit, std::move(note)};
}

Check holds(int criterion, std::string name, bool ok, std::string note = {}) {
    return {criterion, std::move(name), ok ? 1.0 : 0.0, "==", 1.0, ok, std::move(note)};
}

// ---------------------------------------------------------------------------------------------
// Aerodynamics.

aero::StripGeometry defaultWing() {
    const sim::SimConfig cfg;
    const double l = cfg.aerobat.semiSpan();
    return aero::buildStrips(cfg.aero.strips, l, aero::ellipticChord(cfg.aero.root_chord, l));
}

// Exact noise tones, evaluated at any time.
struct Tones {
    std::vector<double> f, p, a;
    Tones() {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> freq(0.2, 20.0), phase(0.0, 2.0 * std::numbers::pi), amp(0.2, 1.0);
        for (int j = 0; j < 24; ++j) {
            f.push_back(freq(rng));
            p.push_back(phase(rng));
            a.push_back(amp(rng));
        }
    }
    double operator()(double t) const {
        double y = 0;
        for (std::size_t j = 0; j < f.size(); ++j) y += a[j] * std::sin(2.0 * std::numbers::pi * f[j] * t + p[j]) / 6.0;
        return y;
    }
};

}  // namespace

std::vector<Check> aeroOracleChecks() {
    const auto start = Clock::now();
    const aero::StripGeometry geom = defaultWing();
    const sim::SimConfig cfg;
    const aero::WagnerCoefficients w = cfg.aero.wagner;
    const aero::AeroSystemMatrices sys = aero::assembleSystem(geom, w, cfg.aero.order);
    const double dt = 1e-4;
    const int n = static_cast<int>(std::llround(1.0 / dt)) + 1;
    const Tones tones;

    std::vector<Check> out;
    for (const std::string kind : {"step", "sine", "noise"}) {
        std::function<double(double)> input;
        if (kind == "step")
            input = [](double) { return 1.0; };
        else if (kind == "sine")
            input = [](double t) { return std::sin(2.0 * std::numbers::pi * 5.0 * t); };
        else
            input = [&tones](double t) { return tones(t); };
        std::vector<double> y(n);
        for (int k = 0; k < n; ++k) y[k] = input(k * dt);

        const auto kin = [&](double t) {
            return aero::StripKinematics::fromEffective(VectorXd::Constant(geom.count(), input(t)));
        };
        std::vector<VectorXd> beta(n);
        aero::AeroState xi = aero::AeroState::zero(sys);
        for (int k = 0; k < n; ++k) {
            beta[k] = aero::stripBeta(xi, kin(k * dt).effective, sys);
            if (k + 1 < n) xi = aero::aeroStep(xi, kin, sys, k * dt, dt);
        }
        double max_err = 0, max_ref = 0;
        for (int i = 0; i < geom.count(); ++i) {
            const std::vector<double> ref = oracle::duhamelResponse(y, dt, geom.chord(i), w);
            for (int k = 0; k < n; ++k) {
                max_err = std::max(max_err, std::abs(beta[k](i) - ref[k]));
                max_ref = std::max(max_ref, std::abs(ref[k]));
            }
        }
        out.push_back(below(1, "state-space vs Duhamel quadrature, " + kind + " history (max relative error)",
                            max_err / max_ref, 1e-3));
    }
    out.push_back(below(1, "aero oracle runtime (s)", seconds(start), 10.0));
    return out;
}

std::vector<Check> kuttaJoukowskiChecks() {
    sim::SimConfig cfg;
    cfg.duration = 1.0;
    const sim::CoupledModel model(cfg);
    const double hover = (cfg.guard.mass + cfg.aerobat.totalMass()) * cfg.gravity() / 6.0;
    const vehicle::ThrusterCommand u = vehicle::ThrusterCommand::Constant(hover);
    sim::CoupledState s = model.initialState();
    const int steps = static_cast<int>(std::llround(cfg.duration / cfg.dt_plant));
    double worst = 0;
    for (int k = 0; k <= steps; ++k) {
        const double t = k * cfg.dt_plant;
        for (vehicle::Side side : {vehicle::Side::Right, vehicle::Side::Left}) {
            const sim::WingAero wa = model.wingAero(side, t, s);
            const aero::AeroState& xi = side == vehicle::Side::Right ? s.wing_right : s.wing_left;
            const VectorXd kj = aero::kuttaJoukowskiBeta(xi, wa.rate, model.aeroSystem());
            worst = std::max(worst, (wa.beta - kj).cwiseAbs().maxCoeff());
        }
        if (k < steps) s = model.step(s, t, cfg.dt_plant, u);
    }
    return {below(2, "max |beta - (Gamma/c + dGamma/dt)| over a 1 s flapping run", worst, 1e-8)};
}

std::vector<Check> ellipticChecks() {
    const aero::StripGeometry geom = defaultWing();
    const int n = geom.count();
    VectorXd a = VectorXd::Zero(n);
    a(0) = 1.7;
    const VectorXd y = aero::inducedKinematics(a, geom);
    const double spread = y.maxCoeff() - y.minCoeff();
    const Eigen::MatrixXd w = aero::inducedBasis(geom, n);
    const double col = (w.col(0).array() - 1.0).abs().maxCoeff();
    return {below(3, "spread of induced kinematics for a = (a1, 0, ..., 0)", spread, 1e-12),
            below(3, "max |W(:,1) - 1|", col, 1e-12)};
}

// ---------------------------------------------------------------------------------------------
// Conservation.

sim::SimConfig passiveAuditConfig(double dt) {
    sim::SimConfig cfg;
    cfg.dt_plant = dt;
    cfg.duration = 1.0;
    cfg.metrics_window = 1.0;
    cfg.forces.thrusters = false;
    cfg.forces.aero = false;
    cfg.gait.proximal_amplitude = 0;
    cfg.gait.fold_amplitude = 0;
    cfg.aerobat.band_damping = 0;
    cfg.initial.aerobat_offset = Vec3(0.0, 0.0, -0.02);
    return cfg;
}

sim::SimConfig freeFallConfig() {
    sim::SimConfig cfg;
    cfg.duration = 0.5;
    cfg.metrics_window = 0.5;
    cfg.forces.thrusters = false;
    cfg.forces.aero = false;
    cfg.forces.bands = false;
    return cfg;
}

std::vector<Check> conservationChecks() {
    const sim::AuditResult fine = sim::passiveEnergyAudit(passiveAuditConfig(1e-4));
    const sim::AuditResult finer = sim::passiveEnergyAudit(passiveAuditConfig(5e-5));
    const sim::AuditResult coarse = sim::passiveEnergyAudit(passiveAuditConfig(2e-3));
    const sim::AuditResult half = sim::passiveEnergyAudit(passiveAuditConfig(1e-3));
    char note[160];
    std::snprintf(note, sizeof note, "drift %.3g at dt 1e-4, %.3g at dt 5e-5", fine.max_drift, finer.max_drift);
    char note2[160];
    std::snprintf(note2, sizeof note2, "drift %.3g at dt 2e-3, %.3g at dt 1e-3", coarse.max_drift, half.max_drift);
    return {below(4, "relative energy drift, 1 s at dt = 1e-4", fine.max_drift, 1e-5),
            atLeast(4, "drift ratio when dt halves from 1e-4", fine.max_drift / finer.max_drift, 12.0, note),
            atLeast(4, "drift ratio when dt halves from 2e-3", coarse.max_drift / half.max_drift, 12.0, note2)};
}

std::vector<Check> freeFallChecks() {
    const sim::SimConfig cfg = freeFallConfig();
    const sim::ScenarioResult r = sim::runScenario(cfg);
    const double z0 = cfg.controller.setpoint.position.z() + cfg.initial.position_offset.z();
    const double t = r.log.rows.back()[r.log.column("t")];
    const double z = r.log.rows.back()[r.log.column("z")];
    const double expected = z0 - 0.5 * vehicle::kGravity * 0.25;
    return {holds(5, "free-fall run completed to t = 0.5 s", r.ok() && std::abs(t - 0.5) < 1e-12),
            below(5, "|z(0.5) - (z0 - 4.9 * 0.25)| (m)", std::abs(z - expected), 1e-6)};
}

// ---------------------------------------------------------------------------------------------
// Observer, cancellation and allocation.

namespace {

control::PlantTerms unitPlant() {
    control::PlantTerms p;
    p.g1.setZero();
    p.g2.setIdentity();
    p.g3.setIdentity();
    return p;
}

}  // namespace

double measuredDecayRate(double omega0, double t0, double t1, double dt) {
    const control::ObserverGains gains = control::tuneObserver(omega0, Mat6::Identity());
    const control::PlantTerms plant = unitPlant();
    control::ObserverState obs;
    obs.x1(0) = 1.0;  // the plant rests at zero, so the estimate is the error
    const int steps = static_cast<int>(std::llround(t1 / dt));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int k = 1; k <= steps; ++k) {
        obs = control::observerStep(obs, Vec6::Zero(), Vec6::Zero(), plant, gains, dt);
        const double t = k * dt;
        if (t < t0 - 1e-12) continue;
        const double e = std::sqrt(obs.x1.squaredNorm() + obs.x2.squaredNorm() + obs.x3.squaredNorm());
        const double ly = std::log(e);
        sx += t;
        sy += ly;
        sxx += t * t;
        sxy += t * ly;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

double peakDisturbanceError(double omega0, double amplitude, double frequency, double duration, double dt) {
    const control::ObserverGains gains = control::tuneObserver(omega0, Mat6::Identity());
    const control::PlantTerms plant = unitPlant();
    const double w = 2.0 * std::numbers::pi * frequency;
    // Joint state: plant (x1, x2, x3) and estimates, first channel only excited.
    using V = Eigen::Matrix<double, 36, 1>;
    auto rhs = [&](double t, const V& s) {
        control::ObserverState obs{s.segment<6>(18), s.segment<6>(24), s.segment<6>(30)};
        const Vec6 x1 = s.segment<6>(0);
        const Vec6 x3 = s.segment<6>(12);
        V d;
        d.segment<6>(0) = s.segment<6>(6);
        d.segment<6>(6) = x3;
        d.segment<6>(12).setZero();
        d(12) = amplitude * std::sin(w * t);
        const control::ObserverDerivative od = control::observerDerivative(obs, x1, Vec6::Zero(), plant, gains);
        d.segment<6>(18) = od.x1;
        d.segment<6>(24) = od.x2;
        d.segment<6>(30) = od.x3;
        return d;
    };
    V s = V::Zero();
    const int steps = static_cast<int>(std::llround(duration / dt));
    double peak = 0;
    for (int k = 0; k < steps; ++k) {
        s = sim::rk4Step(s, k * dt, dt, rhs);
        peak = std::max(peak, (s.segment<6>(30) - s.segment<6>(12)).norm());
    }
    return peak;
}

std::vector<Check> observerChecks() {
    const auto start = Clock::now();
    const double omega0 = 10.0;
    const double rate = measuredDecayRate(omega0, 3.0, 5.0, 1e-3);
    const double gait_frequency = sim::GaitParams{}.frequency;
    const double peak_low = peakDisturbanceError(omega0, 1.0, gait_frequency, 4.0, 1e-4);
    const double peak_high = peakDisturbanceError(3.0 * omega0, 1.0, gait_frequency, 4.0, 1e-4);
    char note[160];
    std::snprintf(note, sizeof note, "peak |e3| %.4g at omega0 = 10, %.4g at omega0 = 30", peak_low, peak_high);
    return {below(6, "|measured decay rate - omega0| / omega0 (G = 0)", std::abs(rate - omega0) / omega0, 0.10),
            atLeast(6, "peak |e3| reduction when omega0 triples (sinusoidal G at gait frequency)",
                    peak_low / peak_high, 5.0, note),
            below(6, "observer suite runtime (s)", seconds(start), 5.0)};
}

std::vector<Check> cancellationChecks() {
    const vehicle::GuardParams params;
    const double g = vehicle::kGravity;
    control::ControllerConfig cfg = control::ControllerConfig::fromPoles(2.0, 8.0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const Vec3 f_ext(0.3 * uni(rng), 0.3 * uni(rng), -0.4 + 0.1 * uni(rng));
    const Vec3 m_ext(0.01 * uni(rng), 0.01 * uni(rng), 0.01 * uni(rng));

    vehicle::GuardState s;
    s.position = Vec3(0.2, -0.1, 0.7);
    s.attitude = eulerToRotation(Euler{0.2, -0.15, 0.4});
    s.velocity = Vec3(0.1, 0.3, -0.2);
    s.omega = Vec3(0.5, -0.4, 0.3);

    const double dt = 1e-3;
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
        const control::GuardMeasurement m = control::measureGuard(s);
        const control::PlantTerms plant = control::guardPlantTerms(m, params, g);
        const Vec6 x3 = control::guardDisturbance(m, f_ext, m_ext, params);
        const Vec6 u0 = control::outerLoop(cfg, control::hoverSetpointError(m.x1, cfg.setpoint), m.x2);
        const Vec6 v = control::cancellationLaw(u0, plant, x3);

        vehicle::BodyWrench w;
        w.moment = v.tail<3>() + m_ext;
        const Vec3 extra = v.head<3>() + f_ext;
        const vehicle::GuardDerivative d = vehicle::guardDerivatives(s, w, params, extra, g);
        const Euler q = Euler::fromVector(m.x1.tail<3>());
        const Vec3 qdd = eulerRateMatrixDot(q, Vec3(m.x2.tail<3>())) * s.omega + eulerRateMatrix(q) * d.omega_rate;
        Vec6 x2dot;
        x2dot << d.acceleration, qdd;
        worst = std::max(worst, (x2dot - u0).cwiseAbs().maxCoeff());

        using V = Eigen::Matrix<double, 18, 1>;
        V x;
        x << s.position, Eigen::Map<const Eigen::Matrix<double, 9, 1>>(s.attitude.data()), s.velocity, s.omega;
        x = sim::rk4Step(x, k * dt, dt, [&](double, const V& xs) {
            vehicle::GuardState gs;
            gs.position = xs.segment<3>(0);
            gs.attitude = Eigen::Map<const Mat3>(xs.data() + 3);
            gs.velocity = xs.segment<3>(12);
            gs.omega = xs.segment<3>(15);
            const vehicle::GuardDerivative gd = vehicle::guardDerivatives(gs, w, params, extra, g);
            V dx;
            dx << gd.velocity, Eigen::Map<const Eigen::Matrix<double, 9, 1>>(gd.attitude_rate.data()), gd.acceleration,
                gd.omega_rate;
            return dx;
        });
        s.position = x.segment<3>(0);
        s.attitude = orthonormalize(Mat3(Eigen::Map<const Mat3>(x.data() + 3)));
        s.velocity = x.segment<3>(12);
        s.omega = x.segment<3>(15);
    }
    return {below(7, "max |x2_dot - u0| with exact disturbance, 1000 steps", worst, 1e-10)};
}

std::vector<Check> allocationChecks() {
    const vehicle::GuardParams params;
    const vehicle::MixingMatrix m = vehicle::mixingMatrix(params);
    Eigen::JacobiSVD<vehicle::MixingMatrix> svd(m);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-12 * sv(0)) ++rank;
    const Eigen::Matrix<double, 6, 6> projector = m.transpose() * (m * m.transpose()).inverse() * m;

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(params.thrust_min, params.thrust_max);
    double worst = 0;
    int samples = 0, draws = 0;
    while (samples < 1000 && draws < 100000) {
        ++draws;
        vehicle::ThrusterCommand raw;
        for (int i = 0; i < 6; ++i) raw(i) = uni(rng);
        const vehicle::ThrusterCommand u = projector * raw;
        if ((u.array() < params.thrust_min).any() || (u.array() > params.thrust_max).any()) continue;
        const vehicle::BodyWrench w = vehicle::thrusterMixing(u, params);
        const control::Allocation a = control::allocate(w, params);
        worst = std::max(worst, (a.command - u).cwiseAbs().maxCoeff());
        ++samples;
    }
    return {holds(8, "mixing matrix rank is 4", rank == 4, "rank " + std::to_string(rank)),
            holds(8, "1000 in-bounds minimum-norm samples drawn", samples == 1000),
            below(8, "max |allocate(M u) - u| over samples", worst, 1e-10)};
}

// ---------------------------------------------------------------------------------------------
// Closed loop.

std::vector<Check> closedLoopChecks(const sim::SimConfig& cfg) {
    const auto start = Clock::now();
    const sim::ScenarioResult first = sim::runScenario(cfg);
    const double runtime = seconds(start);
    const sim::ScenarioResult second = sim::runScenario(cfg);
    const sim::Metrics& m = first.metrics;
    const double deg = std::numbers::pi / 180.0;

    std::vector<Check> out;
    out.push_back(holds(9, "run completed without observer divergence or integration failure", first.ok(),
                        first.ok() ? std::string() : first.failure->message));
    out.push_back(below(9, "RMS position error over final window (m)", m.rms_position_error, 0.01));
    out.push_back(below(9, "max attitude error over final window (deg)", m.max_attitude_error / deg, 3.0));
    out.push_back(below(9, "saturation fraction", m.saturation_fraction, 0.20));
    out.push_back(below(9, "closed-loop runtime (s)", runtime, 120.0));

    if (!first.log.rows.empty()) {
        const std::vector<plot::Sample> forces = plot::genForces(first.log);
        int inertial = 0, aerodynamic = 0;
        for (const char* c : {"x", "y", "z", "roll", "pitch", "yaw"}) {
            inertial += plot::seriesValues(forces, std::string("inertial_") + c).empty() ? 0 : 1;
            aerodynamic += plot::seriesValues(forces, std::string("aero_") + c).empty() ? 0 : 1;
        }
        out.push_back(holds(10, "gen-forces emits six inertial and six aerodynamic series",
                            inertial == 6 && aerodynamic == 6));
        const std::vector<double> series = plot::seriesValues(forces, "aero_z");
        const std::size_t window = static_cast<std::size_t>(std::llround(cfg.metrics_window * cfg.control_rate));
        if (series.size() >= window) {
            const std::vector<double> tail(series.end() - static_cast<std::ptrdiff_t>(window), series.end());
            const plot::Spectrum sp = plot::dominantFrequency(tail, cfg.control_rate);
            const double bins = std::abs(sp.frequency - cfg.gait.frequency) / sp.resolution;
            char note[120];
            std::snprintf(note, sizeof note, "dominant %.3f Hz, gait %.3f Hz, bin width %.3f Hz", sp.frequency,
                          cfg.gait.frequency, sp.resolution);
            out.push_back({10, "aerodynamic z contribution dominant frequency offset (bins)", bins, "<=", 1.0,
                           bins <= 1.0 + 1e-9, note});
        } else {
            out.push_back(holds(10, "aerodynamic z contribution covers the analysis window", false));
        }

        const std::vector<plot::Sample> track = plot::tracking(first.log);
        const double window_start = cfg.duration - cfg.metrics_window - 1e-9;
        for (const char* c : {"x", "y", "z", "roll", "pitch", "yaw"}) {
            const bool angular = std::string(c) == "roll" || std::string(c) == "pitch" || std::string(c) == "yaw";
            std::vector<double> value, setpoint, time;
            for (const plot::Sample& smp : track) {
                if (smp.series == c) {
                    value.push_back(smp.value);
                    time.push_back(smp.t);
                } else if (smp.series == std::string(c) + "_setpoint") {
                    setpoint.push_back(smp.value);
                }
            }
            double worst = 0;
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (time[i] < window_start) continue;
                const double e = angular ? wrapAngle(value[i] - setpoint[i]) : value[i] - setpoint[i];
                worst = std::max(worst, std::abs(e));
            }
            if (angular)
                out.push_back(below(10, std::string("tracking ") + c + " max error over final window (deg)", worst / deg, 3.0));
            else
                out.push_back(below(10, std::string("tracking ") + c + " max error over final window (m)", worst, 0.01));
        }
    }

    const std::string a = io::formatCsv(first.log);
    const std::string b = io::formatCsv(second.log);
    out.push_back(holds(11, "two runs with identical config and seed give byte-identical CSV", a == b,
                        std::to_string(a.size()) + " bytes"));
    return out;
}

// ---------------------------------------------------------------------------------------------

std::vector<std::string> suiteNames() { return {"aero-oracle", "conservation", "observer", "closed-loop"}; }

SuiteReport runSuite(const std::string& name) {
    const auto start = Clock::now();
    SuiteReport r;
    r.name = name;
    auto add = [&r](std::vector<Check> c) { r.checks.insert(r.checks.end(), c.begin(), c.end()); };
    if (name == "aero-oracle") {
        add(aeroOracleChecks());
        add(kuttaJoukowskiChecks());
        add(ellipticChecks());
    } else if (name == "conservation") {
        add(conservationChecks());
        add(freeFallChecks());
    } else if (name == "observer") {
        add(observerChecks());
        add(cancellationChecks());
        add(allocationChecks());
    } else if (name == "closed-loop") {
        add(closedLoopChecks(sim::SimConfig{}));
    } else {
        throw ConfigError("unknown suite '" + name + "' (options: aero-oracle, conservation, observer, closed-loop, all)");
    }
    r.seconds = seconds(start);
    return r;
}

std::vector<SuiteReport> runAll() {
    std::vector<SuiteReport> out;
    for (const std::string& n : suiteNames()) out.push_back(runSuite(n));
    return out;
}

std::string formatCheck(const Check& c) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "  [%s] (%d) %s: %.6g %s %.6g%s%s", c.passed ? "PASS" : "FAIL", c.criterion,
                  c.name.c_str(), c.measured, c.relation.c_str(), c.limit, c.note.empty() ? "" : "  -- ",
                  c.note.c_str());
    return buf;
}

std::string formatReport(const SuiteReport& r) {
    std::string out = r.name + ": " + (r.passed() ? "PASS" : "FAIL");
    char buf[64];
    std::snprintf(buf, sizeof buf, " (%.2f s)\n", r.seconds);
    out += buf;
    for (const Check& c : r.checks) out += formatCheck(c) + "\n";
    return out;
}

}  // namespace aerobat::verify
