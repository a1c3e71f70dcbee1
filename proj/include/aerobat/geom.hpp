#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace aerobat {

template <typename Scalar> using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar> using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;

using Vec3 = Vector3<double>;
using Mat3 = Matrix3<double>;
using Vec6 = Vector6<double>;
using Mat6 = Matrix6<double>;

class GimbalError : public std::runtime_error {
public:
    explicit GimbalError(double pitch)
        : std::runtime_error("attitude too close to gimbal lock (pitch = " + std::to_string(pitch) + " rad)") {}
};

/// Roll, pitch and yaw in radians. Composition order is Z-Y-X (yaw, then pitch, then roll).
template <typename Scalar> struct EulerAngles {
    Scalar roll{0};
    Scalar pitch{0};
    Scalar yaw{0};

    static EulerAngles fromVector(const Vector3<Scalar>& v) { return {v.x(), v.y(), v.z()}; }
    Vector3<Scalar> vector() const { return {roll, pitch, yaw}; }
};

using Euler = EulerAngles<double>;

inline constexpr double kGimbalMargin = 1e-6;

template <typename Scalar> void checkPitch(Scalar pitch) {
    using std::abs;
    if (abs(std::numbers::pi_v<Scalar> / 2 - abs(pitch)) < Scalar(kGimbalMargin)) throw GimbalError(double(pitch));
}

template <typename Scalar> Matrix3<Scalar> rotX(Scalar a) {
    using std::cos;
    using std::sin;
    Matrix3<Scalar> r;
    r << 1, 0, 0, 0, cos(a), -sin(a), 0, sin(a), cos(a);
    return r;
}

template <typename Scalar> Matrix3<Scalar> rotY(Scalar a) {
    using std::cos;
    using std::sin;
    Matrix3<Scalar> r;
    r << cos(a), 0, sin(a), 0, 1, 0, -sin(a), 0, cos(a);
    return r;
}

template <typename Scalar> Matrix3<Scalar> rotZ(Scalar a) {
    using std::cos;
    using std::sin;
    Matrix3<Scalar> r;
    r << cos(a), -sin(a), 0, sin(a), cos(a), 0, 0, 0, 1;
    return r;
}

/// Body-to-world rotation R = Rz(yaw) Ry(pitch) Rx(roll).
template <typename Scalar> Matrix3<Scalar> eulerToRotation(const EulerAngles<Scalar>& q) {
    checkPitch(q.pitch);
    return rotZ(q.yaw) * rotY(q.pitch) * rotX(q.roll);
}

/// Inverse of eulerToRotation, pitch returned in [-pi/2, pi/2].
template <typename Derived> EulerAngles<typename Derived::Scalar> rotationToEuler(const Eigen::MatrixBase<Derived>& r) {
    using Scalar = typename Derived::Scalar;
    using std::asin;
    using std::atan2;
    using std::clamp;
    const Scalar s = clamp(-r(2, 0), Scalar(-1), Scalar(1));
    return {atan2(r(2, 1), r(2, 2)), asin(s), atan2(r(1, 0), r(0, 0))};
}

/// Skew-symmetric matrix with hat(w) * v == w.cross(v).
template <typename Derived> Matrix3<typename Derived::Scalar> hat(const Eigen::MatrixBase<Derived>& w) {
    EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3);
    Matrix3<typename Derived::Scalar> m;
    m << 0, -w(2), w(1), w(2), 0, -w(0), -w(1), w(0), 0;
    return m;
}

template <typename Derived> Vector3<typename Derived::Scalar> vee(const Eigen::MatrixBase<Derived>& m) {
    return {m(2, 1), m(0, 2), m(1, 0)};
}

/// Maps body angular velocity to Z-Y-X Euler rates: qdot = T(q) * omega.
template <typename Scalar> Matrix3<Scalar> eulerRateMatrix(const EulerAngles<Scalar>& q) {
    using std::cos;
    using std::sin;
    using std::tan;
    checkPitch(q.pitch);
    const Scalar sr = sin(q.roll), cr = cos(q.roll);
    const Scalar tp = tan(q.pitch), cp = cos(q.pitch);
    Matrix3<Scalar> t;
    t << 1, sr * tp, cr * tp, 0, cr, -sr, 0, sr / cp, cr / cp;
    return t;
}

/// Time derivative of eulerRateMatrix along the Euler-rate vector qdot.
template <typename Scalar>
Matrix3<Scalar> eulerRateMatrixDot(const EulerAngles<Scalar>& q, const Vector3<Scalar>& qdot) {
    using std::cos;
    using std::sin;
    using std::tan;
    checkPitch(q.pitch);
    const Scalar sr = sin(q.roll), cr = cos(q.roll);
    const Scalar sp = sin(q.pitch), cp = cos(q.pitch), tp = tan(q.pitch);
    const Scalar rd = qdot.x(), pd = qdot.y();
    const Scalar sec2 = 1 / (cp * cp);
    Matrix3<Scalar> t;
    t << 0, cr * rd * tp + sr * pd * sec2, -sr * rd * tp + cr * pd * sec2,
         0, -sr * rd, -cr * rd,
         0, cr * rd / cp + sr * sp * pd * sec2, -sr * rd / cp + cr * sp * pd * sec2;
    return t;
}

template <typename Scalar>
Vector3<Scalar> eulerRatesFromBodyOmega(const EulerAngles<Scalar>& q, const Vector3<Scalar>& omega) {
    return eulerRateMatrix(q) * omega;
}

template <typename Scalar>
Vector3<Scalar> bodyOmegaFromEulerRates(const EulerAngles<Scalar>& q, const Vector3<Scalar>& qdot) {
    using std::cos;
    using std::sin;
    checkPitch(q.pitch);
    const Scalar sr = sin(q.roll), cr = cos(q.roll);
    const Scalar sp = sin(q.pitch), cp = cos(q.pitch);
    Matrix3<Scalar> w;
    w << 1, 0, -sp, 0, cr, sr * cp, 0, -sr, cr * cp;
    return w * qdot;
}

/// Nearest proper rotation (polar factor).
template <typename Derived> Matrix3<typename Derived::Scalar> orthonormalize(const Eigen::MatrixBase<Derived>& r) {
    using Scalar = typename Derived::Scalar;
    Eigen::JacobiSVD<Matrix3<Scalar>> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix3<Scalar> u = svd.matrixU();
    const Matrix3<Scalar> v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0) u.col(2) *= -1;
    return u * v.transpose();
}

template <typename Scalar> Scalar wrapAngle(Scalar a) {
    using std::remainder;
    return remainder(a, 2 * std::numbers::pi_v<Scalar>);
}

template <typename Derived> bool allFinite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

}  // namespace aerobat
