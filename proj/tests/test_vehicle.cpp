#include "aerobat/oracle.hpp"
#include "aerobat/sim.hpp"
#include "aerobat/vehicle.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <numbers>
#include <random>

using namespace aerobat;
using namespace aerobat::vehicle;

namespace {

constexpr double kPi = std::numbers::pi;

GuardState randomGuard(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GuardState s;
    s.position = Vec3(u(rng), u(rng), 1.0 + 0.1 * u(rng));
    s.attitude = eulerToRotation(Euler{0.3 * u(rng), 0.3 * u(rng), u(rng)});
    s.velocity = Vec3(u(rng), u(rng), u(rng));
    s.omega = Vec3(u(rng), u(rng), u(rng));
    return s;
}

AerobatBodyState randomBody(std::mt19937_64& rng, const GuardState& g) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    AerobatBodyState b;
    b.position = g.position + Vec3(0.01 * u(rng), 0.01 * u(rng), -0.03 + 0.01 * u(rng));
    b.attitude = eulerToRotation(Euler{0.2 * u(rng), 0.2 * u(rng), u(rng)});
    b.velocity = Vec3(u(rng), u(rng), u(rng));
    b.omega = Vec3(u(rng), u(rng), u(rng));
    return b;
}

WingJoints joints(double flap, double fold, double flap_rate = 0, double fold_rate = 0) {
    WingJoints j;
    j.angle = Eigen::Vector2d(flap, fold);
    j.rate = Eigen::Vector2d(flap_rate, fold_rate);
    return j;
}

aero::StripGeometry wingStrips(const AerobatParams& p) {
    return aero::buildStrips(8, p.semiSpan(), aero::ellipticChord(0.08, p.semiSpan()));
}

}  // namespace

TEST_SUITE("vehicle") {

TEST_CASE("default masses and span") {
    const AerobatParams a;
    CHECK(a.totalMass() == doctest::Approx(0.040).epsilon(1e-12));
    CHECK(2.0 * a.semiSpan() == doctest::Approx(0.30).epsilon(1e-12));
    CHECK(kGravity == 9.8);
}

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(GuardParams{}.validate());
    CHECK_NOTHROW(AerobatParams{}.validate());
    GuardParams g;
    g.mass = 0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = GuardParams{};
    g.inertia(0, 1) = 1.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = GuardParams{};
    g.arm_y = 0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = GuardParams{};
    g.thrust_min = 2.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);

    AerobatParams a;
    a.band_stiffness = -1;
    CHECK_THROWS_AS(a.validate(), ConfigError);
    a = AerobatParams{};
    a.band_damping = -0.1;
    CHECK_THROWS_AS(a.validate(), ConfigError);
    a = AerobatParams{};
    a.distal.length = 0;
    CHECK_THROWS_AS(a.validate(), ConfigError);
}

TEST_CASE("thruster mixing") {
    GuardParams p;
    CHECK(thrusterMixing(ThrusterCommand::Zero(), p).force == 0.0);
    CHECK(thrusterMixing(ThrusterCommand::Zero(), p).moment.isZero());

    BodyWrench elastic;
    elastic.moment = Vec3(0.3, -0.2, 0.1);
    for (double f : {0.1, 0.7}) {
        ThrusterCommand u = ThrusterCommand::Constant(0.2);
        u(1) = f;
        u(3) = f;
        CHECK(thrusterMixing(u, p, elastic).moment.x() == doctest::Approx(0.3));
    }

    p.arm_z = 0.5;
    ThrusterCommand u;
    u << 0, 0, 0, 0, 1, 2;
    const BodyWrench w = thrusterMixing(u, p);
    CHECK(w.force == doctest::Approx(3.0));
    CHECK(w.moment.z() == doctest::Approx(0.5));

    p.yaw_thrusters_vertical = false;
    CHECK(thrusterMixing(u, p).force == 0.0);
}

TEST_CASE("mixing matrix") {
    const GuardParams p;
    const MixingMatrix m = mixingMatrix(p);
    CHECK((m * ThrusterCommand::Ones() - Eigen::Vector4d(6, 0, 0, 0)).norm() < 1e-15);
    Eigen::Matrix<double, 1, 6> row;
    row << 0, -p.arm_x, 0, p.arm_x, 0, 0;
    CHECK((m.row(1) - row).norm() == 0.0);
    CHECK(Eigen::FullPivLU<MixingMatrix>(m).rank() == 4);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    ThrusterCommand u1, u2;
    for (int i = 0; i < 6; ++i) {
        u1(i) = u(rng);
        u2(i) = u(rng);
    }
    BodyWrench e;
    e.force = 0.3;
    e.moment = Vec3(0.1, 0.2, 0.3);
    const auto wrench = [&](const ThrusterCommand& c) {
        const BodyWrench w = thrusterMixing(c, p, e);
        return Eigen::Vector4d(w.force, w.moment.x(), w.moment.y(), w.moment.z());
    };
    const Eigen::Vector4d base = wrench(ThrusterCommand::Zero());
    CHECK(((wrench(u1 + u2) - base) - (wrench(u1) - base) - (wrench(u2) - base)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((m * u1 - (wrench(u1) - base)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("saturation") {
    const GuardParams p;
    ThrusterCommand u;
    u << -0.5, 0.2, 1.5, 0.9, 0.0, 1.0;
    bool clamped = false;
    const ThrusterCommand s = saturate(u, p, &clamped);
    CHECK(clamped);
    CHECK(s.minCoeff() >= p.thrust_min);
    CHECK(s.maxCoeff() <= p.thrust_max);
    CHECK(s(1) == 0.2);
    saturate(s, p, &clamped);
    CHECK_FALSE(clamped);
}

TEST_CASE("inertial force") {
    CHECK((inertialForce(Mat3::Identity(), 1.0) - Vec3(0, 0, 1)).norm() < 1e-15);
    CHECK((inertialForce(eulerToRotation(Euler{kPi / 2, 0, 0}), 1.0) - Vec3(0, -1, 0)).norm() < 1e-15);
    CHECK(inertialForce(eulerToRotation(Euler{0.3, 0.2, 0.1}), 0.0).norm() == 0.0);
}

TEST_CASE("guard rigid-body rates") {
    const GuardParams p;
    GuardState s;
    const GuardDerivative free = guardDerivatives(s, BodyWrench{}, p);
    CHECK((free.acceleration - Vec3(0, 0, -9.8)).norm() < 1e-15);
    CHECK(free.omega_rate.norm() == 0.0);

    s.omega = Vec3(0, 3.0, 0);
    CHECK(guardDerivatives(s, BodyWrench{}, p).omega_rate.norm() < 1e-15);

    s.attitude = eulerToRotation(Euler{0.1, 0.2, 0.3});
    const GuardDerivative d = guardDerivatives(s, BodyWrench{}, p);
    CHECK((d.attitude_rate - s.attitude * hat(s.omega)).norm() < 1e-15);

    BodyWrench hover;
    hover.force = p.mass * kGravity;
    CHECK(guardDerivatives(GuardState{}, hover, p).acceleration.norm() < 1e-15);
}

TEST_CASE("elastic bands") {
    AerobatParams a;
    a.band_damping = 0;
    GuardState g;
    g.position = Vec3(0, 0, 1);
    AerobatBodyState b;
    b.position = g.position;

    const ElasticWrench centred = elasticWrench(g, b, a);
    CHECK(centred.force_on_aerobat.norm() < 1e-15);
    CHECK(centred.force_on_guard.norm() < 1e-15);

    const double d = 0.02;
    b.position = g.position - Vec3(0, 0, d);
    const ElasticWrench stretched = elasticWrench(g, b, a);
    CHECK((stretched.force_on_aerobat - Vec3(0, 0, a.band_stiffness * d)).norm() < 1e-14);
    CHECK(stretched.energy > 0);

    std::mt19937_64 rng(2);
    AerobatParams damped;
    damped.band_rest_length = 0.01;
    for (int k = 0; k < 100; ++k) {
        const GuardState gs = randomGuard(rng);
        const AerobatBodyState bs = randomBody(rng, gs);
        const ElasticWrench w = elasticWrench(gs, bs, damped);
        CHECK((w.force_on_guard + w.force_on_aerobat).norm() < 1e-12);
    }
}

TEST_CASE("band equilibrium balances gravity") {
    for (double rest : {0.0, 0.02}) {
        AerobatParams a;
        a.band_rest_length = rest;
        GuardState g;
        g.position = Vec3(0.1, -0.2, 1.0);
        g.attitude = eulerToRotation(Euler{0.05, -0.05, 0.3});
        const Mat3 att = g.attitude;
        AerobatBodyState b;
        b.attitude = att;
        b.position = bandEquilibrium(g, att, a);
        const Vec6 q = elasticWrench(g, b, a).generalized_aerobat;
        const Vec3 net = q.head<3>() - Vec3(0, 0, a.totalMass() * kGravity);
        CHECK(net.norm() < 1e-10);
    }
    AerobatParams slack;
    slack.band_stiffness = 0;
    CHECK_THROWS_AS(bandEquilibrium(GuardState{}, Mat3::Identity(), slack), ConfigError);
}

TEST_CASE("Aerobat at band equilibrium stays at rest") {
    const AerobatParams a;
    GuardState g;
    g.position = Vec3(0, 0, 1);
    const sim::GaitParams static_gait{5.0, 0.0, 0.0, kPi / 2, 0.1, 0.4};
    const WingJoints j = sim::gait(0.3, static_gait);
    AerobatBodyState b;
    b.position = bandEquilibrium(g, Mat3::Identity(), a);
    const Vec6 q = elasticWrench(g, b, a).generalized_aerobat;
    const Vec6 acc = aerobatDerivatives(b, j, q, a);
    CHECK(acc.head<3>().norm() < 1e-10);
}

TEST_CASE("mass matrix is symmetric positive definite") {
    const AerobatParams a;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        const GuardState g = randomGuard(rng);
        const AerobatBodyState b = randomBody(rng, g);
        const AerobatDynamicsTerms t = aerobatDynamicsTerms(b, joints(0.6 * u(rng), 0.6 + 0.6 * u(rng)), a);
        CHECK((t.D_u - t.D_u.transpose()).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(Eigen::SelfAdjointEigenSolver<Mat6>(t.D_u).eigenvalues().minCoeff() > 0);
    }

    AerobatParams massless;
    massless.torso_mass = 0;
    massless.proximal.mass = 0;
    massless.distal.mass = 0;
    CHECK_THROWS_AS(aerobatDerivatives(AerobatBodyState{}, joints(0, 0), Vec6::Zero(), massless), DynamicsError);
}

TEST_CASE("symmetric flapping produces no lateral acceleration") {
    const AerobatParams a;
    const sim::GaitParams gait;
    AerobatBodyState b;
    b.position = Vec3(0, 0, 1);
    b.velocity = Vec3(0.2, 0, -0.1);
    b.omega = Vec3(0, 0.4, 0);
    for (double t : {0.0, 0.013, 0.05, 0.11}) {
        const Vec6 acc = aerobatDerivatives(b, sim::gait(t, gait), Vec6::Zero(), a);
        CHECK(std::abs(acc(1)) < 1e-12);
        CHECK(std::abs(acc(3)) < 1e-12);
        CHECK(std::abs(acc(5)) < 1e-12);
    }
}

TEST_CASE("free articulated chain conserves energy") {
    const AerobatParams a;
    const WingJoints j = joints(0.3, 0.5);
    using V = Eigen::Matrix<double, 18, 1>;
    const auto unpack = [](const V& x) {
        AerobatBodyState b;
        b.position = x.segment<3>(0);
        b.attitude = Eigen::Map<const Mat3>(x.data() + 3);
        b.velocity = x.segment<3>(12);
        b.omega = x.segment<3>(15);
        return b;
    };
    const auto energy = [&](const AerobatBodyState& b) {
        return aerobatKineticEnergy(b, j, a) + aerobatGravityEnergy(b, j, a);
    };
    AerobatBodyState b;
    b.position = Vec3(0, 0, 1);
    b.velocity = Vec3(0.1, -0.2, 0.3);
    b.omega = Vec3(1.0, -2.0, 0.5);
    V x;
    x << b.position, Eigen::Map<const Eigen::Matrix<double, 9, 1>>(b.attitude.data()), b.velocity, b.omega;
    const double e0 = energy(b);
    double worst = 0, scale = aerobatKineticEnergy(b, j, a);
    const double dt = 1e-4;
    for (int k = 0; k < 10000; ++k) {
        x = sim::rk4Step(x, k * dt, dt, [&](double, const V& xs) {
            const AerobatBodyState s = unpack(xs);
            const Vec6 acc = aerobatDerivatives(s, j, Vec6::Zero(), a);
            const Mat3 rdot = s.attitude * hat(s.omega);
            V d;
            d << s.velocity, Eigen::Map<const Eigen::Matrix<double, 9, 1>>(rdot.data()), acc;
            return d;
        });
        Mat3 r = Eigen::Map<const Mat3>(x.data() + 3);
        r = orthonormalize(r);
        x.segment<9>(3) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(r.data());
        worst = std::max(worst, std::abs(energy(unpack(x)) - e0));
    }
    CHECK(worst / scale < 1e-6);
}

TEST_CASE("strip kinematics") {
    const AerobatParams a;
    const aero::StripGeometry geom = wingStrips(a);
    const WingJoints j = joints(0.3, 0.6, 2.0, -1.5);
    const auto right = stripPoints(a, j, geom, Side::Right);
    const auto left = stripPoints(a, j, geom, Side::Left);
    REQUIRE(right.size() == 8);
    REQUIRE(left.size() == 8);

    const Mat3 mirror = Vec3(1, -1, 1).asDiagonal();
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK((mirror * left[i].position - right[i].position).norm() < 1e-15);
        CHECK((mirror * left[i].joint_jacobian - right[i].joint_jacobian).norm() < 1e-15);
    }

    AerobatBodyState rest;
    rest.position = Vec3(0, 0, 1);
    for (const StripPoint& s : right) CHECK(stripWorldVelocity(rest, s, joints(0.3, 0.6)).norm() == 0.0);

    AerobatBodyState b;
    b.position = Vec3(0.1, 0.2, 1.0);
    b.attitude = eulerToRotation(Euler{0.2, -0.1, 0.7});
    b.velocity = Vec3(0.3, -0.4, 0.1);
    b.omega = Vec3(0.5, 1.2, -0.8);
    const double w = b.omega.norm();
    for (int i = 0; i < 8; ++i) {
        const auto pos = [&](double h) {
            AerobatBodyState s = b;
            s.position = b.position + h * b.velocity;
            s.attitude = b.attitude * Eigen::AngleAxisd(h * w, b.omega / w).toRotationMatrix();
            const WingJoints jh = joints(j.angle(0) + h * j.rate(0), j.angle(1) + h * j.rate(1));
            return Eigen::VectorXd(stripWorldPosition(s, stripPoints(a, jh, geom, Side::Left)[i]));
        };
        const Eigen::VectorXd fd = oracle::centralDifference(pos, 0.0, 1e-5);
        CHECK((fd - stripWorldVelocity(b, left[i], j)).norm() < 1e-6);

        const StripJacobian jac = stripJacobian(b, left[i]);
        Vec6 nu;
        nu << b.velocity, b.omega;
        CHECK((jac.body * nu + jac.joints * j.rate - stripWorldVelocity(b, left[i], j)).norm() < 1e-14);
    }
}

TEST_CASE("relative state round trip") {
    std::mt19937_64 rng(8);
    const GuardState g = randomGuard(rng);
    const AerobatBodyState b = randomBody(rng, g);
    const WingJoints j = joints(0.2, 0.3, 1.0, -1.0);
    const AerobatRelState rel = relativeState(g, b, j);
    const AerobatBodyState back = bodyFromRelative(g, rel);
    CHECK((back.position - b.position).norm() < 1e-12);
    CHECK((back.attitude - b.attitude).norm() < 1e-12);
    CHECK((back.velocity - b.velocity).norm() < 1e-12);
    CHECK((back.omega - b.omega).norm() < 1e-12);
    CHECK((rel.wings - j.angle).norm() == 0.0);
}

}
