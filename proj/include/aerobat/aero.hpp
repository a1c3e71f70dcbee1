#pragma once

#include "aerobat/errors.hpp"
#include "aerobat/geom.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

// Unsteady lifting-line model of one wing: spanwise strips, a Fourier sine series for the bound
// circulation and two exponential lag states per strip realizing the Wagner indicial response.
namespace aerobat::aero {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Strips on one wing, ordered root to tip. theta = arccos(station / semi_span).
struct StripGeometry {
    double semi_span{0};
    VectorXd station;
    VectorXd theta;
    VectorXd chord;
    VectorXd width;  // spanwise extent used to integrate strip loads

    int count() const { return static_cast<int>(station.size()); }
};

using ChordProfile = std::function<double(double station)>;

/// Chord c(s) = root_chord * sqrt(1 - (s/l)^2); c_i / sin(theta_i) is then constant.
ChordProfile ellipticChord(double root_chord, double semi_span);

/// Cosine-spaced strips: theta uniform over (0, pi/2) with strip centres at the panel midpoints.
StripGeometry buildStrips(int strips, double semi_span, const ChordProfile& chord);

/// Strips at caller-chosen stations. Widths are split at the midpoints between stations.
StripGeometry stripsFromStations(const VectorXd& stations, double semi_span, const VectorXd& chords);

/// m x n matrix with entries sin(k theta_i), k = 1..n.
MatrixXd fourierBasis(const StripGeometry& geom, int order);

/// m x n matrix with entries sin(k theta_i) / sin(theta_i); the first column is all ones.
MatrixXd inducedBasis(const StripGeometry& geom, int order);

/// Gamma_i = sum_k a_k sin(k theta_i).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> circulation(const Eigen::MatrixBase<Derived>& a,
                                                                         const StripGeometry& geom) {
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gamma = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(geom.count());
    for (int i = 0; i < geom.count(); ++i) {
        for (Eigen::Index k = 0; k < a.size(); ++k) gamma(i) += a(k) * Scalar(std::sin((k + 1) * geom.theta(i)));
    }
    return gamma;
}

/// Circulation-induced normal flow y_Gamma,i = sum_k a_k sin(k theta_i) / sin(theta_i).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> inducedKinematics(const Eigen::MatrixBase<Derived>& a,
                                                                               const StripGeometry& geom) {
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(geom.count());
    for (int i = 0; i < geom.count(); ++i) {
        const double s1 = std::sin(geom.theta(i));
        for (Eigen::Index k = 0; k < a.size(); ++k) y(i) += a(k) * Scalar(std::sin((k + 1) * geom.theta(i)) / s1);
    }
    return y;
}

/// Rising: Phi = 1 - psi1 e^{-eps1 tau/c} - psi2 e^{-eps2 tau/c} (classical indicial lift build-up).
/// Decaying: Phi = psi1 e^{-eps1 tau/c} + psi2 e^{-eps2 tau/c}.
enum class WagnerForm { Rising, Decaying };

struct WagnerCoefficients {
    double psi1{0.165};
    double psi2{0.335};
    double eps1{0.0455};
    double eps2{0.3};
    WagnerForm form{WagnerForm::Rising};

    double phi0() const;
    /// +1 when Phi increases with time, -1 when it decays.
    double slopeSign() const { return form == WagnerForm::Rising ? 1.0 : -1.0; }
};

/// Reduced time advanced per second of physical time.
inline constexpr double kReducedTimeRate = 2.0;

double wagnerPhi(double tau, double chord, const WagnerCoefficients& w);

std::string toString(WagnerForm form);
WagnerForm wagnerFormFromString(const std::string& name);

/// How the strip input enters the lag-state equations.
///   Autonomous:   E_i = [2, 2]^T, constant.
///   TimeVarying: E_i = [2 - exp(eps1 t / c_i), 2 - exp(eps2 t / c_i)]^T, grows without bound.
enum class LagInputVariant { Autonomous, TimeVarying };

std::string toString(LagInputVariant v);
LagInputVariant lagInputVariantFromString(const std::string& name);

struct AeroSystemMatrices {
    int strips{0};
    int order{0};
    MatrixXd A;                                   // stacked A_i rows, m x n
    MatrixXd B;                                   // stacked B_i = A_i / c_i
    MatrixXd induced;                             // induced-flow basis, m x n
    Eigen::Matrix<double, Eigen::Dynamic, 2> C;   // row i is C_i
    Eigen::Matrix<double, Eigen::Dynamic, 2> D;   // row i holds the diagonal of D_i
    VectorXd chord;
    WagnerCoefficients wagner;
    LagInputVariant variant{LagInputVariant::Autonomous};
    double phi0{0};
    double condition{0};                          // 2-norm condition number of A

    Eigen::Vector2d lagInput(int strip, double t) const;
    /// Solves A x = rhs (least squares when A is not square).
    VectorXd solveA(const VectorXd& rhs) const;
    int stateSize() const { return order + 2 * strips; }

    Eigen::CompleteOrthogonalDecomposition<MatrixXd> a_solver;
};

/// Builds the per-strip blocks and checks that the unforced model, including the induced-flow
/// feedback, is asymptotically stable.
AeroSystemMatrices assembleSystem(const StripGeometry& geom, const WagnerCoefficients& w, int order,
                                  LagInputVariant variant = LagInputVariant::Autonomous);

/// Linear system matrix of the unforced model (y1 = 0). With include_induced the induced flow W a is
/// fed back into the strip input; the time-varying variant is frozen at t = 0.
MatrixXd systemMatrix(const AeroSystemMatrices& sys, bool include_induced);

/// xi = [a; Z] with Z = [z_{1,1}, z_{2,1}, ..., z_{1,m}, z_{2,m}].
struct AeroState {
    VectorXd a;
    VectorXd z;

    static AeroState zero(const AeroSystemMatrices& sys);
    VectorXd packed() const;
    static AeroState unpack(const Eigen::Ref<const VectorXd>& xi, int order, int strips);
    bool finite() const { return a.allFinite() && z.allFinite(); }
};

struct StripKinematics {
    VectorXd normal_flow;  // y_1
    VectorXd induced;      // y_Gamma
    VectorXd effective;    // y'_1 = y_1 + y_Gamma

    static StripKinematics make(const VectorXd& normal_flow, const VectorXd& induced);
    static StripKinematics fromEffective(const VectorXd& effective);
};

struct AeroDerivative {
    VectorXd a_dot;
    VectorXd z_dot;
};

AeroDerivative aeroDerivative(const AeroState& xi, const VectorXd& effective_flow, const AeroSystemMatrices& sys,
                              double t);

/// beta_i = Phi0 y'_i + C_i Z_i.
VectorXd stripBeta(const AeroState& xi, const VectorXd& effective_flow, const AeroSystemMatrices& sys);

/// Gamma_i / c_i + dGamma_i/dt, the unsteady Kutta-Joukowski response.
VectorXd kuttaJoukowskiBeta(const AeroState& xi, const AeroDerivative& rate, const AeroSystemMatrices& sys);

/// One RK4 step with the strip kinematics held over [t, t + dt].
AeroState aeroStep(const AeroState& xi, const StripKinematics& kin, const AeroSystemMatrices& sys, double t,
                   double dt);

/// One RK4 step with the strip kinematics sampled at the stage times.
AeroState aeroStep(const AeroState& xi, const std::function<StripKinematics(double)>& kin,
                   const AeroSystemMatrices& sys, double t, double dt);

struct AeroParams {
    double air_density{1.225};
    double lift_slope{2.0 * 3.14159265358979323846};
};

/// Local flow seen by one strip, all vectors in the same (world) frame.
struct StripFlow {
    Vec3 relative_air{Vec3::Zero()};  // air velocity relative to the strip
    Vec3 normal{Vec3::UnitZ()};       // unit normal of the wing surface
    Vec3 span_axis{Vec3::UnitY()};
    Vec3 forward{Vec3::UnitX()};      // body forward axis, used for the thrust component
};

/// Normal component of the relative flow, the quasi-steady strip input y_1.
double normalFlow(const StripFlow& flow);

struct StripForces {
    std::vector<Vec3> force;  // per-strip force vectors
    VectorXd thrust;          // component along the body forward axis
    VectorXd lift;            // magnitude perpendicular to the relative flow
    VectorXd drag;            // signed component along the relative flow
    Vec3 total{Vec3::Zero()};
};

/// Each strip carries a force along its surface normal of magnitude
/// 0.5 * rho * lift_slope * U * c_i * width_i * beta_i, where U is the chord-plane flow speed.
StripForces stripForces(const VectorXd& beta, const std::vector<StripFlow>& flows, const StripGeometry& geom,
                        const AeroParams& params);

}  // namespace aerobat::aero
