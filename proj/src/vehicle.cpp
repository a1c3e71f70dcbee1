#include "aerobat/vehicle.hpp"

#include <cmath>

namespace aerobat::vehicle {

namespace {

bool symmetricPositiveDefinite(const Mat3& m) {
    if (!m.isApprox(m.transpose(), 1e-12)) return false;
    Eigen::LLT<Mat3> llt(m);
    return llt.info() == Eigen::Success;
}

Mat3 plateInertia(double mass, double span, double chord) {
    // thin plate, chord along local x and span along local y
    return Eigen::Vector3d(mass * span * span / 12.0, mass * chord * chord / 12.0,
                           mass * (span * span + chord * chord) / 12.0)
        .asDiagonal();
}

Mat3 boxInertia(double mass, const Vec3& size) {
    const Vec3 s2 = size.cwiseProduct(size);
    return Eigen::Vector3d(mass * (s2.y() + s2.z()) / 12.0, mass * (s2.x() + s2.z()) / 12.0,
                           mass * (s2.x() + s2.y()) / 12.0)
        .asDiagonal();
}

}  // namespace

void GuardParams::validate() const {
    if (!(mass > 0)) throw ConfigError("guard mass must be positive");
    if (!symmetricPositiveDefinite(inertia)) throw ConfigError("guard inertia must be symmetric positive definite");
    if (!(arm_x > 0 && arm_y > 0 && arm_z > 0)) throw ConfigError("thruster arms must be positive");
    if (!(thrust_min >= 0 && thrust_min < thrust_max)) throw ConfigError("thrust limits need 0 <= min < max");
}

void AerobatParams::validate() const {
    if (!(totalMass() > 0 && torso_mass > 0)) throw ConfigError("Aerobat mass must be positive");
    if (!(band_stiffness >= 0)) throw ConfigError("band stiffness must be non-negative");
    if (!(band_rest_length >= 0)) throw ConfigError("band rest length must be non-negative");
    if (!(band_damping >= 0)) throw ConfigError("band damping must be non-negative");
    if (!(proximal.mass > 0 && distal.mass > 0 && proximal.length > 0 && distal.length > 0 && proximal.chord > 0 &&
          distal.chord > 0))
        throw ConfigError("wing segments need positive mass, length and chord");
    if (!(torso_size.minCoeff() > 0)) throw ConfigError("torso dimensions must be positive");
    if (!(shoulder_offset >= 0)) throw ConfigError("shoulder offset must be non-negative");
}

BodyWrench thrusterMixing(const ThrusterCommand& u, const GuardParams& params, const BodyWrench& elastic) {
    BodyWrench w;
    w.force = u(0) + u(1) + u(2) + u(3) + elastic.force;
    if (params.yaw_thrusters_vertical) w.force += u(4) + u(5);
    w.moment.x() = params.arm_x * (u(3) - u(1)) + elastic.moment.x();
    w.moment.y() = params.arm_y * (u(2) - u(0)) + elastic.moment.y();
    w.moment.z() = params.arm_z * (u(5) - u(4)) + elastic.moment.z();
    return w;
}

MixingMatrix mixingMatrix(const GuardParams& params) {
    const double yaw_lift = params.yaw_thrusters_vertical ? 1.0 : 0.0;
    MixingMatrix m;
    m << 1, 1, 1, 1, yaw_lift, yaw_lift,
         0, -params.arm_x, 0, params.arm_x, 0, 0,
         -params.arm_y, 0, params.arm_y, 0, 0, 0,
         0, 0, 0, 0, -params.arm_z, params.arm_z;
    return m;
}

ThrusterCommand saturate(const ThrusterCommand& u, const GuardParams& params, bool* clamped) {
    const ThrusterCommand out = u.cwiseMax(params.thrust_min).cwiseMin(params.thrust_max);
    if (clamped) *clamped = (out - u).cwiseAbs().maxCoeff() > 0;
    return out;
}

Vec3 inertialForce(const Mat3& attitude, double body_force) { return attitude.col(2) * body_force; }

GuardDerivative guardDerivatives(const GuardState& s, const BodyWrench& w, const GuardParams& params,
                                 const Vec3& extra_force, double gravity) {
    GuardDerivative d;
    d.velocity = s.velocity;
    d.acceleration = -gravity * Vec3::UnitZ() + (inertialForce(s.attitude, w.force) + extra_force) / params.mass;
    d.attitude_rate = s.attitude * hat(s.omega);
    d.omega_rate = params.inertia.ldlt().solve(w.moment - s.omega.cross(params.inertia * s.omega));
    return d;
}

double guardKineticEnergy(const GuardState& s, const GuardParams& params) {
    return 0.5 * params.mass * s.velocity.squaredNorm() + 0.5 * s.omega.dot(params.inertia * s.omega);
}

AerobatRelState relativeState(const GuardState& guard, const AerobatBodyState& body, const WingJoints& joints) {
    AerobatRelState rel;
    const Mat3 rg_t = guard.attitude.transpose();
    rel.position = rg_t * (body.position - guard.position);
    const Mat3 r_rel = rg_t * body.attitude;
    rel.attitude = rotationToEuler(r_rel);
    rel.velocity = rg_t * (body.velocity - guard.velocity) - guard.omega.cross(rel.position);
    rel.euler_rates = eulerRatesFromBodyOmega(rel.attitude, Vec3(body.omega - r_rel.transpose() * guard.omega));
    rel.wings = joints.angle;
    rel.wing_rates = joints.rate;
    return rel;
}

AerobatBodyState bodyFromRelative(const GuardState& guard, const AerobatRelState& rel) {
    AerobatBodyState body;
    const Mat3 r_rel = eulerToRotation(rel.attitude);
    body.position = guard.position + guard.attitude * rel.position;
    body.attitude = guard.attitude * r_rel;
    body.velocity = guard.velocity + guard.attitude * (rel.velocity + guard.omega.cross(rel.position));
    body.omega = bodyOmegaFromEulerRates(rel.attitude, rel.euler_rates) + r_rel.transpose() * guard.omega;
    return body;
}

namespace {

struct ChainPoint {
    Vec3 pos, vel, acc;
};

// Point fixed at `local` in a frame rotating about the torso x axis with angle rate/accel, pivoting at origin.
ChainPoint rotateAboutX(const ChainPoint& origin, const Mat3& rot, const Vec3& local, double rate, double accel) {
    const Vec3 arm = rot * local;
    const Vec3 w = rate * Vec3::UnitX();
    const Vec3 wd = accel * Vec3::UnitX();
    return {origin.pos + arm, origin.vel + w.cross(arm), origin.acc + wd.cross(arm) + w.cross(w.cross(arm))};
}

struct WingFrames {
    double sign;
    Mat3 rot_prox, rot_dist;
    double prox_rate, prox_acc, dist_rate, dist_acc;
    ChainPoint shoulder, elbow;
};

WingFrames wingFrames(const AerobatParams& p, const WingJoints& j, Side side) {
    WingFrames f;
    f.sign = static_cast<double>(side);
    const double prox_angle = j.angle(0);
    const double dist_angle = j.angle(0) - j.angle(1);
    f.rot_prox = rotX(f.sign * prox_angle);
    f.rot_dist = rotX(f.sign * dist_angle);
    f.prox_rate = f.sign * j.rate(0);
    f.prox_acc = f.sign * j.accel(0);
    f.dist_rate = f.sign * (j.rate(0) - j.rate(1));
    f.dist_acc = f.sign * (j.accel(0) - j.accel(1));
    f.shoulder = {Vec3(0, f.sign * p.shoulder_offset, 0), Vec3::Zero(), Vec3::Zero()};
    f.elbow = rotateAboutX(f.shoulder, f.rot_prox, Vec3(0, f.sign * p.proximal.length, 0), f.prox_rate, f.prox_acc);
    return f;
}

}  // namespace

std::array<LinkKinematics, 5> linkKinematics(const AerobatParams& params, const WingJoints& joints) {
    std::array<LinkKinematics, 5> links;
    links[0].mass = params.torso_mass;
    links[0].inertia_local = boxInertia(params.torso_mass, params.torso_size);
    int k = 1;
    for (Side side : {Side::Right, Side::Left}) {
        const WingFrames f = wingFrames(params, joints, side);
        LinkKinematics& prox = links[k++];
        prox.mass = params.proximal.mass;
        prox.inertia_local = plateInertia(prox.mass, params.proximal.length, params.proximal.chord);
        prox.rotation = f.rot_prox;
        const ChainPoint pc =
            rotateAboutX(f.shoulder, f.rot_prox, Vec3(0, f.sign * params.proximal.length / 2, 0), f.prox_rate, f.prox_acc);
        prox.com = pc.pos;
        prox.com_rate = pc.vel;
        prox.com_accel = pc.acc;
        prox.omega_rel = f.prox_rate * Vec3::UnitX();
        prox.omega_rel_rate = f.prox_acc * Vec3::UnitX();

        LinkKinematics& dist = links[k++];
        dist.mass = params.distal.mass;
        dist.inertia_local = plateInertia(dist.mass, params.distal.length, params.distal.chord);
        dist.rotation = f.rot_dist;
        const ChainPoint dc =
            rotateAboutX(f.elbow, f.rot_dist, Vec3(0, f.sign * params.distal.length / 2, 0), f.dist_rate, f.dist_acc);
        dist.com = dc.pos;
        dist.com_rate = dc.vel;
        dist.com_accel = dc.acc;
        dist.omega_rel = f.dist_rate * Vec3::UnitX();
        dist.omega_rel_rate = f.dist_acc * Vec3::UnitX();
    }
    return links;
}

namespace {

// Inertial bias for a given joint acceleration: the part of D nu_dot + D_ua qw_ddot + H not
// multiplied by nu_dot, without gravity.
Vec6 inertialBias(const AerobatBodyState& body, const std::array<LinkKinematics, 5>& links) {
    const Vec3& w = body.omega;
    Vec3 lin = Vec3::Zero();
    Vec3 ang = Vec3::Zero();
    for (const LinkKinematics& l : links) {
        const Vec3 acc = w.cross(w.cross(l.com)) + 2.0 * w.cross(l.com_rate) + l.com_accel;
        lin += l.mass * acc;
        ang += l.mass * l.com.cross(acc);
        const Mat3 inertia = l.rotation * l.inertia_local * l.rotation.transpose();
        const Vec3 big_omega = w + l.omega_rel;
        ang += inertia * (l.omega_rel_rate + w.cross(l.omega_rel)) + big_omega.cross(inertia * big_omega);
    }
    Vec6 h;
    h << body.attitude * lin, ang;
    return h;
}

}  // namespace

AerobatDynamicsTerms aerobatDynamicsTerms(const AerobatBodyState& body, const WingJoints& joints,
                                          const AerobatParams& params, double gravity) {
    const auto links = linkKinematics(params, joints);
    double mass = 0;
    Vec3 first_moment = Vec3::Zero();
    Mat3 inertia_origin = Mat3::Zero();
    for (const LinkKinematics& l : links) {
        mass += l.mass;
        first_moment += l.mass * l.com;
        const Mat3 s = hat(l.com);
        inertia_origin += -l.mass * s * s + l.rotation * l.inertia_local * l.rotation.transpose();
    }
    const Mat3& r = body.attitude;
    AerobatDynamicsTerms t;
    t.D_u.topLeftCorner<3, 3>() = mass * Mat3::Identity();
    t.D_u.topRightCorner<3, 3>() = -r * hat(first_moment);
    t.D_u.bottomLeftCorner<3, 3>() = hat(first_moment) * r.transpose();
    t.D_u.bottomRightCorner<3, 3>() = inertia_origin;

    WingJoints no_accel = joints;
    no_accel.accel.setZero();
    const auto links_free = linkKinematics(params, no_accel);
    t.H_u = inertialBias(body, links_free);
    t.H_u.head<3>() += mass * gravity * Vec3::UnitZ();
    t.H_u.tail<3>() += gravity * first_moment.cross(r.transpose() * Vec3::UnitZ());

    for (int j = 0; j < 2; ++j) {
        WingJoints unit = no_accel;
        unit.accel(j) = 1.0;
        t.D_ua.col(j) = inertialBias(body, linkKinematics(params, unit)) - inertialBias(body, links_free);
    }
    return t;
}

Vec6 aerobatDerivatives(const AerobatBodyState& body, const WingJoints& joints, const Vec6& generalized_force,
                        const AerobatParams& params, double gravity) {
    const AerobatDynamicsTerms t = aerobatDynamicsTerms(body, joints, params, gravity);
    Eigen::LLT<Mat6> llt(t.D_u);
    if (llt.info() != Eigen::Success)
        throw DynamicsError("Aerobat mass matrix is singular at the current configuration");
    return llt.solve(generalized_force - t.D_ua * joints.accel - t.H_u);
}

Vec6 generalizedForce(const AerobatBodyState& body, const Vec3& point_torso, const Vec3& force_world) {
    Vec6 q;
    q << force_world, point_torso.cross(body.attitude.transpose() * force_world);
    return q;
}

double aerobatKineticEnergy(const AerobatBodyState& body, const WingJoints& joints, const AerobatParams& params) {
    double energy = 0;
    for (const LinkKinematics& l : linkKinematics(params, joints)) {
        const Vec3 v = body.velocity + body.attitude * (body.omega.cross(l.com) + l.com_rate);
        const Vec3 w_local = l.rotation.transpose() * (body.omega + l.omega_rel);
        energy += 0.5 * l.mass * v.squaredNorm() + 0.5 * w_local.dot(l.inertia_local * w_local);
    }
    return energy;
}

double aerobatGravityEnergy(const AerobatBodyState& body, const WingJoints& joints, const AerobatParams& params,
                            double gravity) {
    double energy = 0;
    for (const LinkKinematics& l : linkKinematics(params, joints))
        energy += l.mass * gravity * (body.position + body.attitude * l.com).z();
    return energy;
}

Vec3 aerobatLinearMomentum(const AerobatBodyState& body, const WingJoints& joints, const AerobatParams& params) {
    Vec3 p = Vec3::Zero();
    for (const LinkKinematics& l : linkKinematics(params, joints))
        p += l.mass * (body.velocity + body.attitude * (body.omega.cross(l.com) + l.com_rate));
    return p;
}

BodyWrench ElasticWrench::guardBodyWrench(const Mat3& guard_attitude, Vec3* lateral) const {
    BodyWrench w;
    w.force = guard_attitude.col(2).dot(force_on_guard);
    w.moment = moment_on_guard;
    if (lateral) *lateral = force_on_guard - guard_attitude.col(2) * w.force;
    return w;
}

namespace {

// Spring force on the guard anchor for separation d = guard anchor - body anchor, and its stored energy.
Vec3 springForce(const Vec3& d, double k, double rest, double* energy) {
    const double len = d.norm();
    if (rest == 0 || len == 0) {
        if (energy) *energy += 0.5 * k * (rest == 0 ? d.squaredNorm() : rest * rest);
        return -k * d;
    }
    const double stretch = len - rest;
    if (energy) *energy += 0.5 * k * stretch * stretch;
    return -k * stretch / len * d;
}

}  // namespace

ElasticWrench elasticWrench(const GuardState& guard, const AerobatBodyState& body, const AerobatParams& params) {
    ElasticWrench out;
    const double n = static_cast<double>(params.guard_anchors.size());
    const double k = params.band_stiffness / n;
    const double c = params.band_damping / n;
    for (std::size_t j = 0; j < params.guard_anchors.size(); ++j) {
        const Vec3 guard_arm = guard.attitude * params.guard_anchors[j];
        const Vec3 body_arm = body.attitude * params.body_anchors[j];
        const Vec3 d = (guard.position + guard_arm) - (body.position + body_arm);
        Vec3 on_guard = springForce(d, k, params.band_rest_length, &out.energy);
        if (c > 0) {
            const Vec3 v_guard = guard.velocity + guard.attitude * guard.omega.cross(params.guard_anchors[j]);
            const Vec3 v_body = body.velocity + body.attitude * body.omega.cross(params.body_anchors[j]);
            on_guard -= c * (v_guard - v_body);
        }
        out.force_on_guard += on_guard;
        out.moment_on_guard += params.guard_anchors[j].cross(guard.attitude.transpose() * on_guard);
        out.force_on_aerobat -= on_guard;
        out.generalized_aerobat += generalizedForce(body, params.body_anchors[j], -on_guard);
    }
    return out;
}

Vec3 bandEquilibrium(const GuardState& guard, const Mat3& aerobat_attitude, const AerobatParams& params,
                     double gravity) {
    if (!(params.band_stiffness > 0)) throw ConfigError("band equilibrium needs positive stiffness");
    const double k = params.band_stiffness / static_cast<double>(params.guard_anchors.size());
    const double rest = params.band_rest_length;
    const Vec3 weight = params.totalMass() * gravity * Vec3::UnitZ();
    std::array<Vec3, 4> target;
    Vec3 sum = Vec3::Zero();
    for (std::size_t j = 0; j < target.size(); ++j) {
        target[j] = guard.position + guard.attitude * params.guard_anchors[j] - aerobat_attitude * params.body_anchors[j];
        sum += k * target[j];
    }
    Vec3 p = (sum - weight) / params.band_stiffness;
    if (rest == 0) return p;
    // Newton iteration on the force balance sum_j f_j(p) = m g e3.
    for (int it = 0; it < 100; ++it) {
        Vec3 residual = -weight;
        Mat3 jac = Mat3::Zero();
        for (const Vec3& a : target) {
            const Vec3 d = a - p;
            const double len = d.norm();
            if (len == 0) throw ConfigError("band equilibrium is degenerate (zero band length)");
            const Vec3 u = d / len;
            residual += k * (len - rest) * u;
            jac -= k * ((1.0 - rest / len) * Mat3::Identity() + rest / len * u * u.transpose());
        }
        const Vec3 step = jac.fullPivLu().solve(residual);
        p -= step;
        if (step.norm() < 1e-15 * std::max(1.0, p.norm())) break;
    }
    return p;
}

std::vector<StripPoint> stripPoints(const AerobatParams& params, const WingJoints& joints,
                                    const aero::StripGeometry& geom, Side side) {
    const WingFrames f = wingFrames(params, joints, side);
    const double scale = params.semiSpan() / geom.semi_span;
    std::vector<StripPoint> out;
    out.reserve(geom.count());
    for (int i = 0; i < geom.count(); ++i) {
        const double s = geom.station(i) * scale;
        StripPoint p;
        p.side = side;
        if (s <= params.proximal.length) {
            p.segment = Segment::Proximal;
            p.position = f.shoulder.pos + f.rot_prox * Vec3(0, f.sign * s, 0);
            p.normal = f.rot_prox.col(2);
            p.span_axis = f.rot_prox * Vec3(0, f.sign, 0);
            p.joint_jacobian.col(0) = f.sign * Vec3::UnitX().cross(p.position - f.shoulder.pos);
            p.joint_jacobian.col(1).setZero();
        } else {
            p.segment = Segment::Distal;
            p.position = f.elbow.pos + f.rot_dist * Vec3(0, f.sign * (s - params.proximal.length), 0);
            p.normal = f.rot_dist.col(2);
            p.span_axis = f.rot_dist * Vec3(0, f.sign, 0);
            p.joint_jacobian.col(0) = f.sign * Vec3::UnitX().cross(p.position - f.shoulder.pos);
            p.joint_jacobian.col(1) = -f.sign * Vec3::UnitX().cross(p.position - f.elbow.pos);
        }
        out.push_back(p);
    }
    return out;
}

StripJacobian stripJacobian(const AerobatBodyState& body, const StripPoint& strip) {
    StripJacobian j;
    j.body.leftCols<3>() = Mat3::Identity();
    j.body.rightCols<3>() = -body.attitude * hat(strip.position);
    j.joints = body.attitude * strip.joint_jacobian;
    return j;
}

Vec3 stripWorldPosition(const AerobatBodyState& body, const StripPoint& strip) {
    return body.position + body.attitude * strip.position;
}

Vec3 stripWorldVelocity(const AerobatBodyState& body, const StripPoint& strip, const WingJoints& joints) {
    const StripJacobian j = stripJacobian(body, strip);
    Vec6 nu;
    nu << body.velocity, body.omega;
    return j.body * nu + j.joints * joints.rate;
}

}  // namespace aerobat::vehicle
