#pragma once

#include "ami/dynamics.hpp"
#include "ami/spatial.hpp"

namespace ami {

/// Cascade gains. All "diag" quantities are the diagonals of diagonal gain
/// matrices. Rate-loop gains are in N*m per rad/s (and per rad, rad/s^2).
struct Gains {
  Vec3 k_pos{4.0, 4.0, 3.0};
  Vec3 k_vel{3.5, 3.4, 3.0};
  Vec3 k_int_pos{0.8, 0.8, 0.4};
  double int_limit_pos = 4.0;  // m/s^2, per axis
  Vec3 k_att{6.0, 6.0, 3.0};
  Vec3 k_p_rate{0.15, 0.15, 0.2};
  Vec3 k_i_rate{0.2, 0.2, 0.1};
  Vec3 k_d_rate{0.003, 0.003, 0.0};
  double d_lpf_cutoff_hz = 40.0;
  double i_limit = 0.3;  // N*m

  void validate() const;
};

struct PositionCommand {
  double thrust_des = 0.0;
  UnitQuaternion q_des = UnitQuaternion::Identity();
  Vec3 a_cmd = Vec3::Zero();
  bool free_fall = false;
};

struct PositionSetpoint {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();  // feedforward
  double yaw = 0.0;
};

/// Flatness-based position loop. a_cmd = K_pos e_p + K_vel e_v + integral +
/// g e3 + a_ff + extra_accel; thrust is m_t_hat * a_cmd projected on the
/// current body z, clamped to [0, max_thrust]. If |a_cmd| < 0.1 g the attitude
/// is undefined: q_des falls back to fallback_q and free_fall is set.
PositionCommand position_loop(const PositionSetpoint& sp, const Vec3& p, const Vec3& v,
                              const UnitQuaternion& q, double m_t_hat, const Gains& gains,
                              const Vec3& integral, double g, double max_thrust,
                              const Vec3& extra_accel = Vec3::Zero(),
                              const UnitQuaternion& fallback_q = UnitQuaternion::Identity());

/// Attitude error on SO(3), taken on the short-rotation branch of the error
/// quaternion q_e = q_des^-1 q: e = 2 sign(w_e) vec(q_e). Near zero error this
/// matches 0.5 (R_des^T R - R^T R_des)^vee. Returns -K_att e.
Vec3 attitude_loop(const UnitQuaternion& q_des, const UnitQuaternion& q, const Vec3& k_att);

/// Full attitude error vector (see attitude_loop).
Vec3 attitude_error(const UnitQuaternion& q_des, const UnitQuaternion& q);

/// Inertia-aware gain J_a^-1 * J_t_hat.
Mat3 iags_gain(const Mat3& j_a, const Mat3& j_t_hat);

/// Angular-rate PID with output scaling by the diagonal of K_k. The D term
/// differentiates the error through a first-order low-pass; the integral
/// (stored in torque units) is clamped to |I| <= i_limit.
class RateController {
 public:
  Vec3 step(const Vec3& omega_des, const Vec3& omega, const Gains& gains, const Vec3& k_k_diag,
            double dt);
  void reset();
  const Vec3& integral() const { return integral_; }
  /// Overwrites the integrator state (trimmed starts, bumpless gain changes).
  void set_integral(const Vec3& value) { integral_ = value; }

 private:
  Vec3 integral_ = Vec3::Zero();
  Vec3 prev_error_ = Vec3::Zero();
  Vec3 d_filtered_ = Vec3::Zero();
  bool primed_ = false;
};

struct MixerResult {
  RotorVec thrusts = RotorVec::Zero();
  bool saturated = false;
  bool infeasible = false;
};

/// 4x4 map from per-rotor thrust to [collective; roll; pitch; yaw torque]
/// about the rotor geometric centre.
Eigen::Matrix4d allocation_matrix(const RotorConfig& cfg);

/// Inverse allocation with per-rotor limits [0, max_thrust]. When clamping is
/// needed the collective is moved first to keep the torque; if no collective
/// fits, the torque is scaled down and `infeasible` is set.
MixerResult mixer(double thrust_des, const Vec3& torque_des, const RotorConfig& cfg);

}  // namespace ami
