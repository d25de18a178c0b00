#pragma once

#include <array>

#include "ami/spatial.hpp"

namespace ami {

constexpr double kPi = 3.14159265358979323846;
constexpr double deg2rad(double d) { return d * kPi / 180.0; }

using JointVec = Eigen::Vector3d;

/// 3-RSS delta arm. Frame M sits at the centre of the three servo axes with z
/// up; the platform hangs below (z < 0). Joint angle 0 is a horizontal upper
/// arm; positive angles swing the elbow downward.
struct DeltaGeometry {
  double base_radius = 0.06;
  double platform_radius = 0.03;
  double upper_arm_len = 0.08;
  double forearm_len = 0.16;
  std::array<double, 3> arm_azimuths{0.0, deg2rad(120.0), deg2rad(240.0)};
  std::array<double, 3> joint_min{deg2rad(-30.0), deg2rad(-30.0), deg2rad(-30.0)};
  std::array<double, 3> joint_max{deg2rad(120.0), deg2rad(120.0), deg2rad(120.0)};

  /// Throws InvalidArgument on non-positive lengths or a degenerate workspace.
  void validate() const;
  bool within_limits(const JointVec& theta) const;
};

struct JointState {
  JointVec theta = JointVec::Zero();
  JointVec theta_dot = JointVec::Zero();
};

/// End-effector position in M. Throws NoIntersection when the forearm spheres
/// do not meet. Joint limits are not checked here; callers that need them use
/// within_limits().
Vec3 forward_kin(const DeltaGeometry& geom, const JointVec& theta);

/// Elbow-out closed-form solution per arm. Throws Unreachable or OutOfLimits.
JointVec inverse_kin(const DeltaGeometry& geom, const Vec3& p);

/// d p / d theta. Throws Singular when the condition number exceeds 1e8.
Mat3 jacobian(const DeltaGeometry& geom, const JointVec& theta);

struct JointCommand {
  JointVec theta_des;
  JointVec theta_dot_des;
};

/// Joint-space tracking law: IK for the target pose, inverse-Jacobian velocity
/// feedforward plus proportional correction with gain k_theta (diagonal).
JointCommand joint_command(const DeltaGeometry& geom, const Vec3& target_p, const Vec3& target_v,
                           const JointState& current, const Vec3& k_theta);

/// Servo stand-in: integrates the commanded joint rate, saturated at
/// rate_limit, and clamps to the joint limits.
struct ServoModel {
  double rate_limit = 6.0;

  JointState step(const DeltaGeometry& geom, const JointState& s, const JointVec& rate_cmd,
                  double dt) const;
};

}  // namespace ami
