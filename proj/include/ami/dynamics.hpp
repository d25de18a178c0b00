#pragma once

#include <array>
#include <vector>

#include "ami/spatial.hpp"

namespace ami {

using RotorVec = Eigen::Vector4d;

/// p and v are those of the system centre of mass, in world (z up). q maps
/// body to world. omega is the body-frame angular rate.
struct VehicleState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  UnitQuaternion q = UnitQuaternion::Identity();
  Vec3 omega = Vec3::Zero();
};

/// Rotor speeds are normalised to [0, 1]; thrust = c_T * speed^2, so c_T is
/// also the per-rotor thrust ceiling in newtons.
struct RotorConfig {
  std::array<Vec3, 4> positions{Vec3(0.08, 0.08, 0.0), Vec3(-0.08, 0.08, 0.0),
                                Vec3(-0.08, -0.08, 0.0), Vec3(0.08, -0.08, 0.0)};
  std::array<int, 4> spin_dirs{1, -1, 1, -1};
  double c_T = 18.1712;
  double k_tau = 0.016;
  double K_m = 1.0;
  double tau_m = 0.02;

  void validate() const;
  double max_thrust() const { return c_T; }
  double thrust_from_speed(double speed) const { return c_T * speed * speed; }
  double speed_from_thrust(double thrust) const;
};

struct WindStep {
  double t_start;
  Vec3 force;  // world frame, N
};

struct Environment {
  double g = 9.81;
  std::vector<WindStep> wind;  // piecewise constant, sorted by t_start
  double accel_noise = 0.0;    // m/s^2, 1-sigma
  double gyro_noise = 0.0;     // rad/s, 1-sigma

  Vec3 wind_at(double t) const;
};

struct Wrench {
  Vec3 force = Vec3::Zero();   // body frame
  Vec3 torque = Vec3::Zero();  // body frame, about the system CoM
};

/// Collective force and torque about com (body frame) from per-rotor thrusts.
Wrench rotor_wrench(const RotorVec& thrusts, const RotorConfig& cfg, const Vec3& com);

struct StateDerivative {
  Vec3 p_dot;
  Vec3 v_dot;
  Eigen::Vector4d q_dot;  // (w, x, y, z)
  Vec3 omega_dot;
};

/// Newton-Euler rates for the composite body with total mass m_t and inertia
/// j_t about its CoM; ext_force_world acts at the CoM.
StateDerivative derivatives(const VehicleState& s, const Wrench& w, double m_t, const Mat3& j_t,
                            double g, const Vec3& ext_force_world = Vec3::Zero());

/// Exact discretisation of T_dot = (K_m T_des - T) / tau_m under a held command.
RotorVec motor_lag_step(const RotorVec& t_des, const RotorVec& t_actual, const RotorConfig& cfg,
                        double dt);

struct StepInputs {
  Wrench wrench;
  double mass;
  Mat3 inertia;
  double g = 9.81;
  Vec3 ext_force_world = Vec3::Zero();
};

/// One classical RK4 step with inputs held over dt, quaternion renormalised.
/// dt must lie in (0, 5 ms]. Throws NonFinite on a blown-up state.
VehicleState step_rk4(const VehicleState& s, const StepInputs& in, double dt);

}  // namespace ami
