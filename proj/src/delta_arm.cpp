#include "ami/delta_arm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ami/error.hpp"

namespace ami {
namespace {

Vec3 radial(double azimuth) { return {std::cos(azimuth), std::sin(azimuth), 0.0}; }
Vec3 tangential(double azimuth) { return {-std::sin(azimuth), std::cos(azimuth), 0.0}; }

// Centre of the sphere traced by the platform-side joint of arm i, after
// folding the platform offset into the elbow position.
Vec3 sphere_centre(const DeltaGeometry& g, int i, double theta) {
  const double reach = g.base_radius - g.platform_radius + g.upper_arm_len * std::cos(theta);
  return reach * radial(g.arm_azimuths[i]) - g.upper_arm_len * std::sin(theta) * Vec3::UnitZ();
}

Vec3 sphere_centre_dtheta(const DeltaGeometry& g, int i, double theta) {
  return -g.upper_arm_len * std::sin(theta) * radial(g.arm_azimuths[i]) -
         g.upper_arm_len * std::cos(theta) * Vec3::UnitZ();
}

double condition_number(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m);
  const Vec3 s = svd.singularValues();
  if (s(2) <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(2);
}

constexpr double kMaxCondition = 1e8;

}  // namespace

void DeltaGeometry::validate() const {
  if (!(base_radius > 0 && platform_radius > 0 && upper_arm_len > 0 && forearm_len > 0)) {
    throw Error(ErrorCode::InvalidArgument, "delta geometry lengths must be positive");
  }
  if (!(forearm_len > std::abs(base_radius - platform_radius))) {
    throw Error(ErrorCode::InvalidArgument, "forearm too short for the base/platform offset");
  }
  for (int i = 0; i < 3; ++i) {
    if (!(joint_min[i] < joint_max[i])) {
      throw Error(ErrorCode::InvalidArgument, "joint limits must satisfy min < max");
    }
  }
}

bool DeltaGeometry::within_limits(const JointVec& theta) const {
  for (int i = 0; i < 3; ++i) {
    if (theta(i) < joint_min[i] || theta(i) > joint_max[i]) return false;
  }
  return true;
}

Vec3 forward_kin(const DeltaGeometry& g, const JointVec& theta) {
  const Vec3 c1 = sphere_centre(g, 0, theta(0));
  const Vec3 c2 = sphere_centre(g, 1, theta(1));
  const Vec3 c3 = sphere_centre(g, 2, theta(2));

  // Equal radii: pairwise differences give two planes; their line meets sphere 1.
  Mat3 a;
  a.row(0) = 2.0 * (c2 - c1).transpose();
  a.row(1) = 2.0 * (c3 - c1).transpose();
  const Vec3 n = a.row(0).transpose().cross(a.row(1).transpose());
  if (n.norm() < 1e-14) throw Error(ErrorCode::NoIntersection, "sphere centres are collinear");
  a.row(2) = n.transpose();
  const Vec3 rhs(c2.squaredNorm() - c1.squaredNorm(), c3.squaredNorm() - c1.squaredNorm(),
                 n.dot(c1));
  const Vec3 p0 = a.partialPivLu().solve(rhs);

  const double l = g.forearm_len;
  double disc = l * l - (p0 - c1).squaredNorm();
  if (disc < 0.0 && disc > -1e-12 * l * l) disc = 0.0;  // tangent spheres
  if (disc < 0.0) throw Error(ErrorCode::NoIntersection, "forearm spheres do not meet");
  Vec3 dir = n.normalized();
  if (dir.z() > 0.0) dir = -dir;  // platform hangs below the base
  return p0 + std::sqrt(disc) * dir;
}

JointVec inverse_kin(const DeltaGeometry& g, const Vec3& p) {
  JointVec theta;
  const double L = g.upper_arm_len;
  const double l = g.forearm_len;
  for (int i = 0; i < 3; ++i) {
    const double a = p.dot(radial(g.arm_azimuths[i])) - (g.base_radius - g.platform_radius);
    const double y = p.dot(tangential(g.arm_azimuths[i]));
    const double z = p.z();
    // A cos(t) + B sin(t) = C
    const double A = -2.0 * a * L;
    const double B = 2.0 * z * L;
    const double C = l * l - a * a - y * y - z * z - L * L;
    const double rho = std::hypot(A, B);
    if (rho == 0.0 || std::abs(C) > rho) {
      throw Error(ErrorCode::Unreachable, "target outside the reach of arm " + std::to_string(i));
    }
    const double phi = std::atan2(B, A);
    const double delta = std::acos(std::clamp(C / rho, -1.0, 1.0));
    const double t1 = std::remainder(phi + delta, 2.0 * kPi);
    const double t2 = std::remainder(phi - delta, 2.0 * kPi);
    // Elbow-out: the branch whose elbow lies farther from the base axis.
    theta(i) = std::cos(t1) >= std::cos(t2) ? t1 : t2;
  }
  if (!g.within_limits(theta)) {
    throw Error(ErrorCode::OutOfLimits, "inverse kinematics solution violates joint limits");
  }
  return theta;
}

Mat3 jacobian(const DeltaGeometry& g, const JointVec& theta) {
  const Vec3 p = forward_kin(g, theta);
  // Each chain keeps |p - c_i(theta_i)| = l, so (p - c_i).(v - c_i' theta_dot_i) = 0.
  Mat3 a;
  Vec3 b;
  double min_sine = 1.0;
  for (int i = 0; i < 3; ++i) {
    const Vec3 r = p - sphere_centre(g, i, theta(i));
    const Vec3 dc = sphere_centre_dtheta(g, i, theta(i));
    a.row(i) = r.transpose();
    b(i) = r.dot(dc);
    min_sine = std::min(min_sine, std::abs(b(i)) / (r.norm() * dc.norm()));
  }
  if (min_sine < 1.0 / kMaxCondition) {
    throw Error(ErrorCode::Singular, "arm at a stretched-out boundary pose");
  }
  if (condition_number(a) > kMaxCondition) {
    throw Error(ErrorCode::Singular, "forearm directions are nearly coplanar");
  }
  return a.partialPivLu().solve(Mat3(b.asDiagonal()));
}

JointCommand joint_command(const DeltaGeometry& g, const Vec3& target_p, const Vec3& target_v,
                           const JointState& current, const Vec3& k_theta) {
  JointCommand cmd;
  cmd.theta_des = inverse_kin(g, target_p);
  const Mat3 j = jacobian(g, cmd.theta_des);
  const JointVec ff = j.partialPivLu().solve(target_v);
  cmd.theta_dot_des = ff + k_theta.cwiseProduct(cmd.theta_des - current.theta);
  return cmd;
}

JointState ServoModel::step(const DeltaGeometry& g, const JointState& s, const JointVec& rate_cmd,
                            double dt) const {
  JointState out;
  for (int i = 0; i < 3; ++i) {
    const double rate = std::clamp(rate_cmd(i), -rate_limit, rate_limit);
    const double next = std::clamp(s.theta(i) + rate * dt, g.joint_min[i], g.joint_max[i]);
    out.theta(i) = next;
    out.theta_dot(i) = (next - s.theta(i)) / dt;
  }
  return out;
}

}  // namespace ami
