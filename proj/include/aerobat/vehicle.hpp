#pragma once

#include "aerobat/aero.hpp"
#include "aerobat/errors.hpp"
#include "aerobat/geom.hpp"

#include <array>
#include <vector>

namespace aerobat::vehicle {

inline constexpr double kGravity = 9.8;

// ---------------------------------------------------------------------------------------------
// Guard: rigid cage with six thrusters.

struct GuardParams {
    double mass{0.10};
    Mat3 inertia{Eigen::Vector3d(2.0e-3, 3.0e-3, 4.5e-3).asDiagonal()};
    double arm_x{0.10};  // roll pair f2/f4
    double arm_y{0.10};  // pitch pair f1/f3
    double arm_z{0.15};  // yaw pair f5/f6
    double thrust_min{0.0};
    double thrust_max{1.0};
    bool yaw_thrusters_vertical{true};

    void validate() const;
};

struct GuardState {
    Vec3 position{Vec3::Zero()};
    Mat3 attitude{Mat3::Identity()};  // body to world
    Vec3 velocity{Vec3::Zero()};
    Vec3 omega{Vec3::Zero()};         // body frame
};

struct GuardDerivative {
    Vec3 velocity;
    Vec3 acceleration;
    Mat3 attitude_rate;
    Vec3 omega_rate;
};

/// Total force along the body z axis and body moments.
struct BodyWrench {
    double force{0};
    Vec3 moment{Vec3::Zero()};
};

using ThrusterCommand = Eigen::Matrix<double, 6, 1>;
using MixingMatrix = Eigen::Matrix<double, 4, 6>;

/// f = sum f_i + f_e, m_x = L_x (f4 - f2) + m_e,x, m_y = L_y (f3 - f1) + m_e,y, m_z = L_z (f6 - f5) + m_e,z.
BodyWrench thrusterMixing(const ThrusterCommand& u, const GuardParams& params, const BodyWrench& elastic = {});

/// Rows (f, m_x, m_y, m_z) of the linear part of thrusterMixing.
MixingMatrix mixingMatrix(const GuardParams& params);

ThrusterCommand saturate(const ThrusterCommand& u, const GuardParams& params, bool* clamped = nullptr);

/// World-frame force R * (0, 0, f).
Vec3 inertialForce(const Mat3& attitude, double body_force);

/// Newton-Euler rates. extra_force is an additional world-frame force on the centre of mass.
GuardDerivative guardDerivatives(const GuardState& s, const BodyWrench& w, const GuardParams& params,
                                 const Vec3& extra_force = Vec3::Zero(), double gravity = kGravity);

double guardKineticEnergy(const GuardState& s, const GuardParams& params);

// ---------------------------------------------------------------------------------------------
// Aerobat: torso with a proximal and a distal wing segment per side, joints driven by the gait.

struct SegmentParams {
    double mass{0};
    double length{0};
    double chord{0};  // mean chord, used for the segment inertia only
};

struct AerobatParams {
    double torso_mass{0.026};
    Vec3 torso_size{0.06, 0.03, 0.02};
    double shoulder_offset{0.015};
    SegmentParams proximal{0.004, 0.07, 0.07};
    SegmentParams distal{0.003, 0.08, 0.05};
    double band_stiffness{10.0};  // K, shared equally by the four bands
    double band_rest_length{0.0}; // m, pretension offset of each band
    double band_damping{0.25};    // N s/m, viscous loss shared equally by the four bands
    std::array<Vec3, 4> guard_anchors{Vec3(0.08, 0.08, 0.0), Vec3(-0.08, 0.08, 0.0), Vec3(-0.08, -0.08, 0.0),
                                      Vec3(0.08, -0.08, 0.0)};
    std::array<Vec3, 4> body_anchors{Vec3(0.02, 0.015, 0.0), Vec3(-0.02, 0.015, 0.0), Vec3(-0.02, -0.015, 0.0),
                                     Vec3(0.02, -0.015, 0.0)};

    double totalMass() const { return torso_mass + 2.0 * (proximal.mass + distal.mass); }
    double semiSpan() const { return proximal.length + distal.length; }
    void validate() const;
};

/// Wing joint trajectory sample: flap (alpha_3) and fold (alpha_4) with rates and accelerations.
/// Positive flap raises both wing tips; positive fold bends the distal segment down.
struct WingJoints {
    Eigen::Vector2d angle{Eigen::Vector2d::Zero()};
    Eigen::Vector2d rate{Eigen::Vector2d::Zero()};
    Eigen::Vector2d accel{Eigen::Vector2d::Zero()};
};

/// Floating-base state of the torso: world position and attitude, world velocity, body angular velocity.
struct AerobatBodyState {
    Vec3 position{Vec3::Zero()};
    Mat3 attitude{Mat3::Identity()};
    Vec3 velocity{Vec3::Zero()};
    Vec3 omega{Vec3::Zero()};
};

/// Pose of the Aerobat expressed in the guard frame, plus the wing joints.
struct AerobatRelState {
    Vec3 position{Vec3::Zero()};
    Euler attitude{};
    Eigen::Vector2d wings{Eigen::Vector2d::Zero()};
    Vec3 velocity{Vec3::Zero()};  // d/dt of position, guard frame
    Vec3 euler_rates{Vec3::Zero()};
    Eigen::Vector2d wing_rates{Eigen::Vector2d::Zero()};
};

AerobatRelState relativeState(const GuardState& guard, const AerobatBodyState& body, const WingJoints& joints);
AerobatBodyState bodyFromRelative(const GuardState& guard, const AerobatRelState& rel);

enum class Side { Right = 1, Left = -1 };
enum class Segment { Torso, Proximal, Distal };

/// Kinematics of one rigid body of the chain, expressed in the torso frame.
struct LinkKinematics {
    double mass{0};
    Mat3 inertia_local{Mat3::Zero()};   // about the centre of mass, link frame
    Mat3 rotation{Mat3::Identity()};    // link frame to torso frame
    Vec3 com{Vec3::Zero()};
    Vec3 com_rate{Vec3::Zero()};
    Vec3 com_accel{Vec3::Zero()};
    Vec3 omega_rel{Vec3::Zero()};       // relative to the torso
    Vec3 omega_rel_rate{Vec3::Zero()};
};

/// Torso, right proximal, right distal, left proximal, left distal.
std::array<LinkKinematics, 5> linkKinematics(const AerobatParams& params, const WingJoints& joints);

/// Partitioned dynamics in the generalized speeds nu = (world velocity, body angular velocity):
///   D_u nu_dot + D_ua qw_ddot + H_u = Q
/// H_u holds Coriolis, centrifugal and gravity terms; band and aerodynamic loads enter through Q.
struct AerobatDynamicsTerms {
    Mat6 D_u;
    Eigen::Matrix<double, 6, 2> D_ua;
    Vec6 H_u;
};

AerobatDynamicsTerms aerobatDynamicsTerms(const AerobatBodyState& body, const WingJoints& joints,
                                          const AerobatParams& params, double gravity = kGravity);

/// nu_dot = D_u^{-1} (Q - D_ua qw_ddot - H_u).
Vec6 aerobatDerivatives(const AerobatBodyState& body, const WingJoints& joints, const Vec6& generalized_force,
                        const AerobatParams& params, double gravity = kGravity);

/// Generalized force of a world-frame force applied at a torso-frame point.
Vec6 generalizedForce(const AerobatBodyState& body, const Vec3& point_torso, const Vec3& force_world);

double aerobatKineticEnergy(const AerobatBodyState& body, const WingJoints& joints, const AerobatParams& params);
double aerobatGravityEnergy(const AerobatBodyState& body, const WingJoints& joints, const AerobatParams& params,
                            double gravity = kGravity);
Vec3 aerobatLinearMomentum(const AerobatBodyState& body, const WingJoints& joints, const AerobatParams& params);

// ---------------------------------------------------------------------------------------------
// Elastic bands: linear springs with rest length and viscous loss between guard and torso anchors.

struct ElasticWrench {
    Vec3 force_on_guard{Vec3::Zero()};    // world
    Vec3 moment_on_guard{Vec3::Zero()};   // guard body frame, about the guard centre of mass
    Vec3 force_on_aerobat{Vec3::Zero()};  // world
    Vec6 generalized_aerobat{Vec6::Zero()};
    double energy{0};  // stored elastic energy; the viscous part is dissipative

    /// Split into the body-z force and moments of the thrust equation; the remainder of the band
    /// force perpendicular to the body z axis is returned in lateral.
    BodyWrench guardBodyWrench(const Mat3& guard_attitude, Vec3* lateral) const;
};

ElasticWrench elasticWrench(const GuardState& guard, const AerobatBodyState& body, const AerobatParams& params);

/// Torso position that balances gravity against the bands for a given guard pose and attitude
/// (both bodies at rest).
Vec3 bandEquilibrium(const GuardState& guard, const Mat3& aerobat_attitude, const AerobatParams& params,
                     double gravity = kGravity);

// ---------------------------------------------------------------------------------------------
// Strip kinematics for the aerodynamic model.

/// One strip on a wing segment, torso frame.
struct StripPoint {
    Side side{Side::Right};
    Segment segment{Segment::Proximal};
    Vec3 position{Vec3::Zero()};
    Vec3 normal{Vec3::UnitZ()};
    Vec3 span_axis{Vec3::UnitY()};
    Eigen::Matrix<double, 3, 2> joint_jacobian{Eigen::Matrix<double, 3, 2>::Zero()};  // d position / d q_w
};

std::vector<StripPoint> stripPoints(const AerobatParams& params, const WingJoints& joints,
                                    const aero::StripGeometry& geom, Side side);

/// World velocity of a strip: J_u nu + J_w qw_dot.
struct StripJacobian {
    Eigen::Matrix<double, 3, 6> body;
    Eigen::Matrix<double, 3, 2> joints;
};

StripJacobian stripJacobian(const AerobatBodyState& body, const StripPoint& strip);

Vec3 stripWorldPosition(const AerobatBodyState& body, const StripPoint& strip);
Vec3 stripWorldVelocity(const AerobatBodyState& body, const StripPoint& strip, const WingJoints& joints);

}  // namespace aerobat::vehicle
