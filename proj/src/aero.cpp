#include "aerobat/aero.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace aerobat::aero {

ChordProfile ellipticChord(double root_chord, double semi_span) {
    return [root_chord, semi_span](double s) {
        const double r = s / semi_span;
        return root_chord * std::sqrt(std::max(0.0, 1.0 - r * r));
    };
}

namespace {

void validate(const StripGeometry& g) {
    if (g.count() < 1) throw ConfigError("strip geometry needs at least one strip");
    if (!(g.semi_span > 0)) throw ConfigError("semi-span must be positive");
    for (int i = 0; i < g.count(); ++i) {
        const double s = g.station(i);
        if (!(s > 0 && s < g.semi_span))
            throw ConfigError("strip station " + std::to_string(s) + " must lie strictly inside (0, semi_span)");
        if (!(g.chord(i) > 0)) throw ConfigError("strip chord must be positive");
        if (i > 0 && !(g.theta(i) < g.theta(i - 1))) throw ConfigError("strip stations must be strictly increasing");
    }
}

}  // namespace

StripGeometry buildStrips(int strips, double semi_span, const ChordProfile& chord) {
    if (strips < 1) throw ConfigError("strip count must be at least 1");
    if (!(semi_span > 0)) throw ConfigError("semi-span must be positive");
    const double half_pi = std::numbers::pi / 2;
    StripGeometry g;
    g.semi_span = semi_span;
    g.station.resize(strips);
    g.theta.resize(strips);
    g.chord.resize(strips);
    g.width.resize(strips);
    // Panel edges at theta_j = (pi/2) j / m, j = 0..m; strip i runs root (theta = pi/2) to tip.
    for (int i = 0; i < strips; ++i) {
        const double theta_root = half_pi * (strips - i) / strips;
        const double theta_tip = half_pi * (strips - i - 1) / strips;
        const double theta_mid = 0.5 * (theta_root + theta_tip);
        g.station(i) = semi_span * std::cos(theta_mid);
        g.theta(i) = std::acos(g.station(i) / semi_span);
        g.width(i) = semi_span * (std::cos(theta_tip) - std::cos(theta_root));
        g.chord(i) = chord(g.station(i));
    }
    validate(g);
    return g;
}

StripGeometry stripsFromStations(const VectorXd& stations, double semi_span, const VectorXd& chords) {
    if (stations.size() != chords.size()) throw ConfigError("stations and chords differ in length");
    StripGeometry g;
    g.semi_span = semi_span;
    g.station = stations;
    g.chord = chords;
    g.theta.resize(stations.size());
    g.width.resize(stations.size());
    if (stations.size() == 0) validate(g);
    for (Eigen::Index i = 0; i < stations.size(); ++i) g.theta(i) = std::acos(std::clamp(stations(i) / semi_span, -1.0, 1.0));
    validate(g);
    const auto n = stations.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lo = i == 0 ? 0.0 : 0.5 * (stations(i - 1) + stations(i));
        const double hi = i == n - 1 ? semi_span : 0.5 * (stations(i) + stations(i + 1));
        g.width(i) = hi - lo;
    }
    return g;
}

MatrixXd fourierBasis(const StripGeometry& geom, int order) {
    MatrixXd a(geom.count(), order);
    for (int i = 0; i < geom.count(); ++i)
        for (int k = 0; k < order; ++k) a(i, k) = std::sin((k + 1) * geom.theta(i));
    return a;
}

MatrixXd inducedBasis(const StripGeometry& geom, int order) {
    MatrixXd w(geom.count(), order);
    for (int i = 0; i < geom.count(); ++i) {
        const double s1 = std::sin(geom.theta(i));
        w(i, 0) = 1.0;
        for (int k = 1; k < order; ++k) w(i, k) = std::sin((k + 1) * geom.theta(i)) / s1;
    }
    return w;
}

double WagnerCoefficients::phi0() const { return wagnerPhi(0.0, 1.0, *this); }

double wagnerPhi(double tau, double chord, const WagnerCoefficients& w) {
    const double decay = w.psi1 * std::exp(-w.eps1 * tau / chord) + w.psi2 * std::exp(-w.eps2 * tau / chord);
    return w.form == WagnerForm::Rising ? 1.0 - decay : decay;
}

std::string toString(WagnerForm form) { return form == WagnerForm::Rising ? "rising" : "decaying"; }

WagnerForm wagnerFormFromString(const std::string& name) {
    if (name == "rising") return WagnerForm::Rising;
    if (name == "decaying") return WagnerForm::Decaying;
    throw ConfigError("unknown Wagner form '" + name + "' (expected rising | decaying)");
}

std::string toString(LagInputVariant v) { return v == LagInputVariant::Autonomous ? "autonomous" : "time-varying"; }

LagInputVariant lagInputVariantFromString(const std::string& name) {
    if (name == "autonomous") return LagInputVariant::Autonomous;
    if (name == "time-varying") return LagInputVariant::TimeVarying;
    throw ConfigError("unknown lag input variant '" + name + "' (expected autonomous | time-varying)");
}

Eigen::Vector2d AeroSystemMatrices::lagInput(int strip, double t) const {
    if (variant == LagInputVariant::Autonomous) return Eigen::Vector2d::Constant(kReducedTimeRate);
    const double c = chord(strip);
    return {2.0 - std::exp(wagner.eps1 * t / c), 2.0 - std::exp(wagner.eps2 * t / c)};
}

VectorXd AeroSystemMatrices::solveA(const VectorXd& rhs) const { return a_solver.solve(rhs); }

AeroSystemMatrices assembleSystem(const StripGeometry& geom, const WagnerCoefficients& w, int order,
                                  LagInputVariant variant) {
    if (order < 1) throw ConfigError("Fourier order must be at least 1");
    if (!(w.eps1 > 0 && w.eps2 > 0)) throw ConfigError("Wagner exponents must be positive");
    const int m = geom.count();
    AeroSystemMatrices sys;
    sys.strips = m;
    sys.order = order;
    sys.A = fourierBasis(geom, order);
    sys.B = geom.chord.cwiseInverse().asDiagonal() * sys.A;
    sys.induced = inducedBasis(geom, order);
    sys.chord = geom.chord;
    sys.wagner = w;
    sys.variant = variant;
    sys.phi0 = w.phi0();
    sys.C.resize(m, 2);
    sys.D.resize(m, 2);
    const double sign = w.slopeSign();
    for (int i = 0; i < m; ++i) {
        const double c = geom.chord(i);
        sys.C.row(i) << sign * w.psi1 * w.eps1 / c, sign * w.psi2 * w.eps2 / c;
        sys.D.row(i) << -kReducedTimeRate * w.eps1 / c, -kReducedTimeRate * w.eps2 / c;
    }

    Eigen::JacobiSVD<MatrixXd> svd(sys.A);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    sys.condition = smin > 0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (order > m || !(sys.condition < 1e12))
        throw ConfigError("stacked circulation basis is singular (condition " + std::to_string(sys.condition) +
                          "); check strip stations and Fourier order");
    sys.a_solver.compute(sys.A);

    const Eigen::VectorXcd eig = systemMatrix(sys, true).eigenvalues();
    const double abscissa = eig.real().maxCoeff();
    if (!(abscissa < 0))
        throw ConfigError("aerodynamic model is not asymptotically stable (max Re(lambda) = " +
                          std::to_string(abscissa) + "); reduce chord or Phi0");
    return sys;
}

MatrixXd systemMatrix(const AeroSystemMatrices& sys, bool include_induced) {
    const int n = sys.order, m = sys.strips;
    MatrixXd rhs_a = MatrixXd::Zero(m, n + 2 * m);  // A a_dot = rhs_a * xi
    MatrixXd zdot = MatrixXd::Zero(2 * m, n + 2 * m);
    rhs_a.leftCols(n) = -sys.B;
    if (include_induced) rhs_a.leftCols(n) += sys.phi0 * sys.induced;
    for (int i = 0; i < m; ++i) {
        rhs_a(i, n + 2 * i) = sys.C(i, 0);
        rhs_a(i, n + 2 * i + 1) = sys.C(i, 1);
        const Eigen::Vector2d e = sys.lagInput(i, 0.0);
        for (int k = 0; k < 2; ++k) {
            zdot(2 * i + k, n + 2 * i + k) = sys.D(i, k);
            if (include_induced) zdot.row(2 * i + k).head(n) += e(k) * sys.induced.row(i);
        }
    }
    MatrixXd full(n + 2 * m, n + 2 * m);
    full.topRows(n) = sys.a_solver.solve(rhs_a);
    full.bottomRows(2 * m) = zdot;
    return full;
}

AeroState AeroState::zero(const AeroSystemMatrices& sys) {
    return {VectorXd::Zero(sys.order), VectorXd::Zero(2 * sys.strips)};
}

VectorXd AeroState::packed() const {
    VectorXd xi(a.size() + z.size());
    xi << a, z;
    return xi;
}

AeroState AeroState::unpack(const Eigen::Ref<const VectorXd>& xi, int order, int strips) {
    return {xi.head(order), xi.segment(order, 2 * strips)};
}

StripKinematics StripKinematics::make(const VectorXd& normal_flow, const VectorXd& induced) {
    return {normal_flow, induced, normal_flow + induced};
}

StripKinematics StripKinematics::fromEffective(const VectorXd& effective) {
    return {effective, VectorXd::Zero(effective.size()), effective};
}

AeroDerivative aeroDerivative(const AeroState& xi, const VectorXd& effective_flow, const AeroSystemMatrices& sys,
                              double t) {
    const int m = sys.strips;
    VectorXd rhs = -sys.B * xi.a + sys.phi0 * effective_flow;
    AeroDerivative d;
    d.z_dot.resize(2 * m);
    for (int i = 0; i < m; ++i) {
        const Eigen::Vector2d zi = xi.z.segment<2>(2 * i);
        rhs(i) += sys.C.row(i).dot(zi);
        const Eigen::Vector2d e = sys.lagInput(i, t);
        d.z_dot.segment<2>(2 * i) = sys.D.row(i).transpose().cwiseProduct(zi) + e * effective_flow(i);
    }
    d.a_dot = sys.solveA(rhs);
    return d;
}

VectorXd stripBeta(const AeroState& xi, const VectorXd& effective_flow, const AeroSystemMatrices& sys) {
    VectorXd beta = sys.phi0 * effective_flow;
    for (int i = 0; i < sys.strips; ++i) beta(i) += sys.C.row(i).dot(xi.z.segment<2>(2 * i));
    return beta;
}

VectorXd kuttaJoukowskiBeta(const AeroState& xi, const AeroDerivative& rate, const AeroSystemMatrices& sys) {
    return sys.B * xi.a + sys.A * rate.a_dot;
}

namespace {

AeroState axpy(const AeroState& x, double h, const AeroDerivative& d) {
    return {x.a + h * d.a_dot, x.z + h * d.z_dot};
}

}  // namespace

AeroState aeroStep(const AeroState& xi, const std::function<StripKinematics(double)>& kin,
                   const AeroSystemMatrices& sys, double t, double dt) {
    if (!(dt > 0)) throw ConfigError("aero step needs dt > 0");
    const double h2 = 0.5 * dt;
    const AeroDerivative k1 = aeroDerivative(xi, kin(t).effective, sys, t);
    const AeroDerivative k2 = aeroDerivative(axpy(xi, h2, k1), kin(t + h2).effective, sys, t + h2);
    const AeroDerivative k3 = aeroDerivative(axpy(xi, h2, k2), kin(t + h2).effective, sys, t + h2);
    const AeroDerivative k4 = aeroDerivative(axpy(xi, dt, k3), kin(t + dt).effective, sys, t + dt);
    AeroState out{xi.a + dt / 6.0 * (k1.a_dot + 2.0 * k2.a_dot + 2.0 * k3.a_dot + k4.a_dot),
                  xi.z + dt / 6.0 * (k1.z_dot + 2.0 * k2.z_dot + 2.0 * k3.z_dot + k4.z_dot)};
    if (!out.finite()) throw IntegrationError("non-finite aerodynamic state", t + dt);
    return out;
}

AeroState aeroStep(const AeroState& xi, const StripKinematics& kin, const AeroSystemMatrices& sys, double t,
                   double dt) {
    return aeroStep(xi, [&kin](double) { return kin; }, sys, t, dt);
}

double normalFlow(const StripFlow& flow) { return flow.relative_air.dot(flow.normal); }

StripForces stripForces(const VectorXd& beta, const std::vector<StripFlow>& flows, const StripGeometry& geom,
                        const AeroParams& params) {
    const int m = geom.count();
    if (beta.size() != m || static_cast<int>(flows.size()) != m)
        throw ConfigError("strip force inputs do not match strip count");
    StripForces out;
    out.force.resize(m);
    out.thrust.resize(m);
    out.lift.resize(m);
    out.drag.resize(m);
    for (int i = 0; i < m; ++i) {
        const StripFlow& f = flows[i];
        const Vec3 chord_plane = f.relative_air - f.relative_air.dot(f.span_axis) * f.span_axis;
        const double speed = chord_plane.norm();
        const double magnitude =
            0.5 * params.air_density * params.lift_slope * speed * geom.chord(i) * geom.width(i) * beta(i);
        const Vec3 force = magnitude * f.normal;
        out.force[i] = force;
        out.total += force;
        out.thrust(i) = force.dot(f.forward);
        const double air_speed = f.relative_air.norm();
        if (air_speed > 0) {
            const Vec3 along = f.relative_air / air_speed;
            out.drag(i) = force.dot(along);
            out.lift(i) = (force - out.drag(i) * along).norm();
        } else {
            out.drag(i) = 0;
            out.lift(i) = 0;
        }
    }
    return out;
}

}  // namespace aerobat::aero
