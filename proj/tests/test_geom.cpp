#include "aerobat/geom.hpp"
#include "aerobat/oracle.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace aerobat;

namespace {

constexpr double kPi = std::numbers::pi;

bool near(const Mat3& a, const Mat3& b, double tol) { return (a - b).cwiseAbs().maxCoeff() < tol; }

}  // namespace

TEST_SUITE("geom") {

TEST_CASE("euler to rotation reference cases") {
    CHECK(near(eulerToRotation(Euler{0, 0, 0}), Mat3::Identity(), 1e-15));

    const Mat3 yaw = eulerToRotation(Euler{0, 0, kPi / 2});
    CHECK((yaw * Vec3::UnitX() - Vec3::UnitY()).norm() < 1e-15);
    CHECK((yaw * Vec3::UnitY() + Vec3::UnitX()).norm() < 1e-15);
    CHECK((yaw * Vec3::UnitZ() - Vec3::UnitZ()).norm() < 1e-15);

    const Mat3 roll = eulerToRotation(Euler{kPi, 0, 0});
    CHECK(near(roll, Vec3(1, -1, -1).asDiagonal().toDenseMatrix(), 1e-15));
}

TEST_CASE("rotation is orthonormal with unit determinant") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ang(-1.5, 1.5);
    for (int k = 0; k < 200; ++k) {
        const Mat3 r = eulerToRotation(Euler{2 * ang(rng), ang(rng), 2 * ang(rng)});
        CHECK(near(r.transpose() * r, Mat3::Identity(), 1e-12));
        CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
    }
}

TEST_CASE("rotation to euler inverts euler to rotation away from gimbal lock") {
    const Euler q{0.3, -0.7, 2.5};
    const Euler back = rotationToEuler(eulerToRotation(q));
    CHECK(back.roll == doctest::Approx(q.roll).epsilon(1e-12));
    CHECK(back.pitch == doctest::Approx(q.pitch).epsilon(1e-12));
    CHECK(back.yaw == doctest::Approx(q.yaw).epsilon(1e-12));
}

TEST_CASE("pitch at the gimbal limit is rejected") {
    CHECK_THROWS_AS(eulerToRotation(Euler{0, kPi / 2, 0}), GimbalError);
    CHECK_THROWS_AS(eulerRateMatrix(Euler{0, -kPi / 2 + 1e-8, 0}), GimbalError);
    CHECK_NOTHROW(eulerToRotation(Euler{0, kPi / 2 - 1e-3, 0}));
}

TEST_CASE("hat map") {
    CHECK(hat(Vec3::Zero()).isZero());
    CHECK((hat(Vec3(0, 0, 1)) * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm() == 0.0);
    const Mat3 h = hat(Vec3(1, 2, 3));
    CHECK((h + h.transpose()).isZero());
    CHECK((vee(h) - Vec3(1, 2, 3)).norm() == 0.0);

    const Vec3 w1(0.3, -1.2, 2.0), w2(-0.5, 0.25, 4.0);
    CHECK(hat(Vec3(2.0 * w1 - 3.0 * w2)) == 2.0 * hat(w1) - 3.0 * hat(w2));
    CHECK((hat(w1) * w2 - w1.cross(w2)).norm() < 1e-15);
}

TEST_CASE("euler rates from body rates") {
    CHECK((eulerRatesFromBodyOmega(Euler{}, Vec3(1, 0, 0)) - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK((eulerRatesFromBodyOmega(Euler{}, Vec3(0, 0, 1)) - Vec3(0, 0, 1)).norm() < 1e-15);

    // R_dot = R hat(omega): the rates must reproduce the finite-differenced rotation.
    const Euler q{0.1, 0.2, 0.3};
    const Vec3 omega(0.3, -0.1, 0.2);
    const Vec3 qdot = eulerRatesFromBodyOmega(q, omega);
    const auto flat = [&](double h) {
        const Mat3 r = eulerToRotation(Euler::fromVector(Vec3(q.vector() + h * qdot)));
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(r.data(), 9));
    };
    const Eigen::VectorXd rdot = oracle::centralDifference(flat, 0.0, 1e-5);
    const Mat3 expected = eulerToRotation(q) * hat(omega);
    CHECK((Eigen::Map<const Mat3>(rdot.data()) - expected).cwiseAbs().maxCoeff() < 1e-6);

    CHECK((bodyOmegaFromEulerRates(q, qdot) - omega).norm() < 1e-14);
}

TEST_CASE("euler rate matrix derivative matches finite difference") {
    const Euler q{0.4, -0.3, 1.1};
    const Vec3 qdot(0.7, -0.2, 0.5);
    const auto flat = [&](double h) {
        const Mat3 t = eulerRateMatrix(Euler::fromVector(Vec3(q.vector() + h * qdot)));
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(t.data(), 9));
    };
    const Eigen::VectorXd fd = oracle::centralDifference(flat, 0.0, 1e-5);
    CHECK((Eigen::Map<const Mat3>(fd.data()) - eulerRateMatrixDot(q, qdot)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("orthonormalize restores a perturbed rotation") {
    Mat3 r = eulerToRotation(Euler{0.2, 0.1, -0.4});
    r(0, 1) += 1e-4;
    r(2, 2) -= 2e-4;
    const Mat3 q = orthonormalize(r);
    CHECK(near(q.transpose() * q, Mat3::Identity(), 1e-14));
    CHECK(q.determinant() > 0);
    CHECK(near(q, r, 1e-3));
}

TEST_CASE("angle wrapping") {
    CHECK(wrapAngle(2 * kPi - 0.01) == doctest::Approx(-0.01).epsilon(1e-12));
    CHECK(wrapAngle(0.5) == 0.5);
    CHECK(std::abs(wrapAngle(7 * kPi)) == doctest::Approx(kPi));
}

TEST_CASE("templated on scalar") {
    const Matrix3<float> r = eulerToRotation(EulerAngles<float>{0.1f, 0.2f, 0.3f});
    CHECK((r.transpose() * r - Matrix3<float>::Identity()).cwiseAbs().maxCoeff() < 1e-6f);
}

}
