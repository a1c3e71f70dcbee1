#include "aerobat/aero.hpp"
#include "aerobat/oracle.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <numbers>
#include <random>

using namespace aerobat;
using namespace aerobat::aero;

namespace {

constexpr double kPi = std::numbers::pi;

StripGeometry defaultWing() { return buildStrips(8, 0.15, ellipticChord(0.08, 0.15)); }

StripGeometry singleStrip(double theta, double chord) {
    const double l = 1.0;
    return stripsFromStations(VectorXd::Constant(1, l * std::cos(theta)), l, VectorXd::Constant(1, chord));
}

}  // namespace

TEST_SUITE("aero") {

TEST_CASE("cosine-spaced strips") {
    const StripGeometry g = defaultWing();
    REQUIRE(g.count() == 8);
    for (int i = 0; i < g.count(); ++i) {
        CHECK(g.station(i) > 0);
        CHECK(g.station(i) < g.semi_span);
        CHECK(g.chord(i) > 0);
        CHECK(g.theta(i) == doctest::Approx(std::acos(g.station(i) / g.semi_span)));
        if (i > 0) CHECK(g.theta(i) < g.theta(i - 1));
    }
    CHECK(g.width.sum() == doctest::Approx(g.semi_span).epsilon(1e-12));
    // Elliptic chord: c_i / sin(theta_i) is the root chord.
    for (int i = 0; i < g.count(); ++i) CHECK(g.chord(i) / std::sin(g.theta(i)) == doctest::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("strip stations map to the transformed span coordinate") {
    CHECK(singleStrip(kPi / 4, 0.05).theta(0) == doctest::Approx(kPi / 4).epsilon(1e-14));
    const StripGeometry root = stripsFromStations(VectorXd::Constant(1, 1e-12), 1.0, VectorXd::Constant(1, 0.05));
    CHECK(root.theta(0) == doctest::Approx(kPi / 2).epsilon(1e-11));
}

TEST_CASE("strip construction rejects degenerate input") {
    const ChordProfile c = ellipticChord(0.08, 0.15);
    CHECK_THROWS_AS(buildStrips(0, 0.15, c), ConfigError);
    CHECK_THROWS_AS(buildStrips(8, 0.0, c), ConfigError);
    CHECK_THROWS_AS(buildStrips(8, -1.0, c), ConfigError);
    CHECK_THROWS_AS(stripsFromStations(VectorXd::Constant(1, 0.0), 1.0, VectorXd::Constant(1, 0.1)), ConfigError);
    CHECK_THROWS_AS(stripsFromStations(VectorXd::Constant(1, 1.0), 1.0, VectorXd::Constant(1, 0.1)), ConfigError);
    CHECK_THROWS_AS(stripsFromStations(VectorXd::Constant(1, 0.5), 1.0, VectorXd::Constant(1, 0.0)), ConfigError);
    CHECK_THROWS_AS(stripsFromStations(VectorXd::Constant(2, 0.5), 1.0, VectorXd::Constant(2, 0.1)), ConfigError);
}

TEST_CASE("circulation and induced kinematics") {
    const StripGeometry g3 = singleStrip(kPi / 3, 0.1);
    const StripGeometry g2 = singleStrip(kPi / 2 - 1e-9, 0.1);
    CHECK(circulation(Eigen::Vector3d::Zero(), g3)(0) == 0.0);
    CHECK(circulation(Eigen::Vector3d(1, 0, 0), g2)(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(circulation(Eigen::Vector3d(1, 1, 1), g3)(0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));

    CHECK(inducedKinematics(Eigen::Vector3d::Zero(), g3)(0) == 0.0);
    CHECK(inducedKinematics(Eigen::Vector3d(1, 1, 1), g3)(0) == doctest::Approx(2.0).epsilon(1e-12));

    const StripGeometry wing = defaultWing();
    const VectorXd y = inducedKinematics(Eigen::Vector3d(1, 0, 0), wing);
    CHECK((y.array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK((inducedBasis(wing, 8).col(0).array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK((inducedBasis(wing, 8) * VectorXd::Unit(8, 0) - y).norm() < 1e-14);
}

TEST_CASE("Wagner indicial response") {
    WagnerCoefficients decaying;
    decaying.form = WagnerForm::Decaying;
    CHECK(wagnerPhi(0.0, 0.1, decaying) == doctest::Approx(0.5));
    CHECK(wagnerPhi(1e6, 0.1, decaying) == doctest::Approx(0.0));

    const WagnerCoefficients rising;
    CHECK(wagnerPhi(0.0, 0.1, rising) == doctest::Approx(0.5));
    CHECK(wagnerPhi(1e6, 0.1, rising) == doctest::Approx(1.0));
    CHECK(rising.phi0() == doctest::Approx(0.5));
    CHECK(wagnerPhi(3.0, 0.1, rising) > wagnerPhi(1.0, 0.1, rising));

    CHECK((wagnerFormFromString(toString(WagnerForm::Decaying)) == WagnerForm::Decaying));
    CHECK((lagInputVariantFromString(toString(LagInputVariant::TimeVarying)) == LagInputVariant::TimeVarying));
    CHECK_THROWS_AS(wagnerFormFromString("sideways"), ConfigError);
    CHECK_THROWS_AS(lagInputVariantFromString("nope"), ConfigError);
}

TEST_CASE("single strip system blocks") {
    WagnerCoefficients w;
    w.form = WagnerForm::Decaying;
    const AeroSystemMatrices sys = assembleSystem(singleStrip(kPi / 2 - 1e-12, 1.0), w, 1);
    CHECK(sys.A(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sys.B(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sys.D(0, 0) == doctest::Approx(-2 * w.eps1));
    CHECK(sys.D(0, 1) == doctest::Approx(-2 * w.eps2));

    // With the rising form the static gain 1/c balances Phi(inf) = 1 exactly: marginal, so rejected.
    CHECK_THROWS_AS(assembleSystem(singleStrip(kPi / 2 - 1e-12, 1.0), WagnerCoefficients{}, 1), ConfigError);
    CHECK_NOTHROW(assembleSystem(singleStrip(kPi / 2 - 1e-12, 0.5), WagnerCoefficients{}, 1));
}

TEST_CASE("system assembly invariants") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.02, 0.12);
    VectorXd stations(5), chords(5);
    for (int i = 0; i < 5; ++i) {
        stations(i) = 0.15 * (i + 0.5) / 5.0;
        chords(i) = u(rng);
    }
    const AeroSystemMatrices sys = assembleSystem(stripsFromStations(stations, 0.15, chords), WagnerCoefficients{}, 5);
    for (int i = 0; i < 5; ++i) {
        CHECK((sys.B.row(i) * chords(i) - sys.A.row(i)).norm() < 1e-15);
        CHECK(sys.D(i, 0) < 0);
        CHECK(sys.D(i, 1) < 0);
    }

    const StripGeometry wing = defaultWing();
    const AeroSystemMatrices def = assembleSystem(wing, WagnerCoefficients{}, 8);
    CHECK(std::isfinite(def.condition));
    CHECK(def.condition < 1e8);
    CHECK(def.stateSize() == 8 + 16);
    const Eigen::VectorXcd eig = systemMatrix(def, true).eigenvalues();
    CHECK(eig.real().maxCoeff() < 0);

    CHECK((def.lagInput(0, 0.0) - Eigen::Vector2d(2, 2)).norm() == 0.0);
    const AeroSystemMatrices literal = assembleSystem(wing, WagnerCoefficients{}, 8, LagInputVariant::TimeVarying);
    CHECK(std::abs(literal.lagInput(0, 5.0)(1)) > std::abs(literal.lagInput(0, 0.0)(1)));
}

TEST_CASE("system assembly rejects bad inputs") {
    WagnerCoefficients w;
    w.eps1 = 0;
    CHECK_THROWS_AS(assembleSystem(defaultWing(), w, 8), ConfigError);
    CHECK_THROWS_AS(assembleSystem(defaultWing(), WagnerCoefficients{}, 0), ConfigError);
    // Coincident strips make the stacked basis singular.
    VectorXd stations(2), chords(2);
    stations << 0.05, 0.05 + 1e-17;
    chords << 0.05, 0.05;
    CHECK_THROWS_AS(assembleSystem(stripsFromStations(stations, 0.15, chords), WagnerCoefficients{}, 2), ConfigError);
}

TEST_CASE("state-space march") {
    const StripGeometry g = defaultWing();
    const AeroSystemMatrices sys = assembleSystem(g, WagnerCoefficients{}, 8);
    const StripKinematics still = StripKinematics::fromEffective(VectorXd::Zero(8));

    AeroState zero = AeroState::zero(sys);
    CHECK(aeroStep(zero, still, sys, 0.0, 1e-3).packed().norm() == 0.0);

    // Zero input: each lag state decays with rate 2 eps_k / c_i.
    AeroState xi = AeroState::zero(sys);
    xi.z.setOnes();
    const double dt = 1e-4;
    for (int k = 0; k < 1000; ++k) xi = aeroStep(xi, still, sys, k * dt, dt);
    const WagnerCoefficients& w = sys.wagner;
    for (int i = 0; i < 8; ++i) {
        CHECK(xi.z(2 * i) == doctest::Approx(std::exp(-2 * w.eps1 / g.chord(i) * 0.1)).epsilon(1e-9));
        CHECK(xi.z(2 * i + 1) == doctest::Approx(std::exp(-2 * w.eps2 / g.chord(i) * 0.1)).epsilon(1e-9));
    }

    const AeroState nan{VectorXd::Constant(8, std::nan("")), VectorXd::Zero(16)};
    CHECK_THROWS_AS(aeroStep(nan, still, sys, 0.0, dt), IntegrationError);
    CHECK_THROWS_AS(aeroStep(zero, still, sys, 0.0, 0.0), ConfigError);
}

TEST_CASE("superposition of input histories") {
    const StripGeometry g = defaultWing();
    const AeroSystemMatrices sys = assembleSystem(g, WagnerCoefficients{}, 8);
    auto march = [&](const std::function<double(double)>& y) {
        AeroState xi = AeroState::zero(sys);
        const auto kin = [&](double t) { return StripKinematics::fromEffective(VectorXd::Constant(8, y(t))); };
        for (int k = 0; k < 2000; ++k) xi = aeroStep(xi, kin, sys, k * 1e-4, 1e-4);
        return stripBeta(xi, kin(0.2).effective, sys);
    };
    const auto y1 = [](double t) { return std::sin(20 * t); };
    const auto y2 = [](double t) { return 0.3 + t * t; };
    const VectorXd sum = march([&](double t) { return y1(t) + y2(t); });
    CHECK((sum - march(y1) - march(y2)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("strip response") {
    const AeroSystemMatrices sys = assembleSystem(defaultWing(), WagnerCoefficients{}, 8);
    const AeroState zero = AeroState::zero(sys);
    CHECK(stripBeta(zero, VectorXd::Zero(8), sys).norm() == 0.0);
    const VectorXd beta = stripBeta(zero, VectorXd::Ones(8), sys);
    CHECK((beta.array() - sys.phi0).abs().maxCoeff() < 1e-15);

    const StripKinematics k = StripKinematics::make(VectorXd::Constant(8, 0.5), VectorXd::Constant(8, 0.25));
    CHECK((k.effective.array() - 0.75).abs().maxCoeff() == 0.0);
}

TEST_CASE("Duhamel oracle") {
    const WagnerCoefficients w;
    const double dt = 1e-4, chord = 0.06;
    const int n = 5001;
    std::vector<double> zeros(n, 0.0), ones(n, 1.0), sine(n);
    for (int k = 0; k < n; ++k) sine[k] = std::sin(k * dt);

    for (double b : oracle::duhamelResponse(zeros, dt, chord, w)) CHECK(b == 0.0);

    const std::vector<double> step = oracle::duhamelResponse(ones, dt, chord, w);
    double worst = 0;
    for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(step[k] - wagnerPhi(2.0 * k * dt, chord, w)));
    CHECK(worst < 1e-4);

    const StripGeometry g = singleStrip(1.0, chord);
    const AeroSystemMatrices sys = assembleSystem(g, w, 1);
    const std::vector<double> ref = oracle::duhamelResponse(sine, dt, chord, w);
    AeroState xi = AeroState::zero(sys);
    const auto kin = [](double t) { return StripKinematics::fromEffective(VectorXd::Constant(1, std::sin(t))); };
    double err = 0, scale = 0;
    for (int k = 0; k < n; ++k) {
        const double beta = stripBeta(xi, kin(k * dt).effective, sys)(0);
        err = std::max(err, std::abs(beta - ref[k]));
        scale = std::max(scale, std::abs(ref[k]));
        if (k + 1 < n) xi = aeroStep(xi, kin, sys, k * dt, dt);
    }
    CHECK(err / scale < 1e-3);
}

TEST_CASE("Kutta-Joukowski consistency along a forced trajectory") {
    const AeroSystemMatrices sys = assembleSystem(defaultWing(), WagnerCoefficients{}, 8);
    AeroState xi = AeroState::zero(sys);
    const auto kin = [](double t) {
        VectorXd y(8);
        for (int i = 0; i < 8; ++i) y(i) = std::sin(31.4 * t + 0.2 * i);
        return StripKinematics::fromEffective(y);
    };
    double worst = 0;
    for (int k = 0; k < 500; ++k) {
        const double t = k * 1e-4;
        const VectorXd y = kin(t).effective;
        const AeroDerivative d = aeroDerivative(xi, y, sys, t);
        worst = std::max(worst, (stripBeta(xi, y, sys) - kuttaJoukowskiBeta(xi, d, sys)).cwiseAbs().maxCoeff());
        xi = aeroStep(xi, kin, sys, t, 1e-4);
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("strip forces") {
    const StripGeometry g = defaultWing();
    std::vector<StripFlow> flows(8);
    for (StripFlow& f : flows) {
        f.relative_air = Vec3(-3.0, 0.0, -0.8);
        f.normal = Vec3::UnitZ();
    }
    const AeroParams air;
    const StripForces none = stripForces(VectorXd::Zero(8), flows, g, air);
    CHECK(none.total.norm() == 0.0);

    const VectorXd beta = VectorXd::LinSpaced(8, 0.1, 0.4);
    const StripForces base = stripForces(beta, flows, g, air);
    Vec3 sum = Vec3::Zero();
    for (const Vec3& f : base.force) sum += f;
    CHECK((sum - base.total).norm() < 1e-15);

    AeroParams dense = air;
    dense.air_density *= 2;
    const StripForces doubled = stripForces(beta, flows, g, dense);
    CHECK((doubled.total - 2.0 * base.total).norm() < 1e-15);

    std::vector<StripFlow> reversed = flows;
    for (StripFlow& f : reversed) f.relative_air = -f.relative_air;
    const StripForces back = stripForces(beta, reversed, g, air);
    CHECK((back.drag + base.drag).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(std::abs(normalFlow(reversed[0])) == doctest::Approx(std::abs(normalFlow(flows[0]))));

    CHECK_THROWS_AS(stripForces(VectorXd::Zero(3), flows, g, air), ConfigError);
}

}
