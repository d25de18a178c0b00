#include "ami/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ami/delta_arm.hpp"
#include "ami/error.hpp"

namespace ami {

void Gains::validate() const {
  const auto nonneg = [](const Vec3& v) { return (v.array() >= 0.0).all() && v.allFinite(); };
  if (!(nonneg(k_pos) && nonneg(k_vel) && nonneg(k_int_pos) && nonneg(k_att) &&
        nonneg(k_p_rate) && nonneg(k_i_rate) && nonneg(k_d_rate))) {
    throw Error(ErrorCode::InvalidArgument, "gain diagonals must be non-negative");
  }
  if (!(d_lpf_cutoff_hz > 0.0) || !(i_limit >= 0.0) || !(int_limit_pos >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "filter cutoff and limits must be positive");
  }
}

PositionCommand position_loop(const PositionSetpoint& sp, const Vec3& p, const Vec3& v,
                              const UnitQuaternion& q, double m_t_hat, const Gains& gains,
                              const Vec3& integral, double g, double max_thrust,
                              const Vec3& extra_accel, const UnitQuaternion& fallback_q) {
  if (!(m_t_hat > 0.0)) throw Error(ErrorCode::InvalidArgument, "m_t_hat must be positive");
  PositionCommand out;
  out.a_cmd = gains.k_pos.cwiseProduct(sp.p - p) + gains.k_vel.cwiseProduct(sp.v - v) + integral +
              g * Vec3::UnitZ() + sp.a + extra_accel;

  const Vec3 body_z = q * Vec3::UnitZ();
  out.thrust_des = std::clamp(m_t_hat * out.a_cmd.dot(body_z), 0.0, max_thrust);

  const double a_norm = out.a_cmd.norm();
  if (a_norm < 0.1 * g) {
    out.free_fall = true;
    out.q_des = fallback_q;
    return out;
  }
  const Vec3 b3 = out.a_cmd / a_norm;
  const Vec3 heading(std::cos(sp.yaw), std::sin(sp.yaw), 0.0);
  Vec3 b2 = b3.cross(heading);
  if (b2.norm() < 1e-9) {
    // Thrust axis along the heading: pick any orthogonal direction.
    b2 = b3.cross(Vec3::UnitY());
  }
  b2.normalize();
  const Vec3 b1 = b2.cross(b3);
  Mat3 r_des;
  r_des.col(0) = b1;
  r_des.col(1) = b2;
  r_des.col(2) = b3;
  out.q_des = from_matrix(r_des);
  return out;
}

Vec3 attitude_error(const UnitQuaternion& q_des, const UnitQuaternion& q) {
  const UnitQuaternion qe = q_des.conjugate() * q;
  const double sign = qe.w() < 0.0 ? -1.0 : 1.0;
  return 2.0 * sign * qe.vec();
}

Vec3 attitude_loop(const UnitQuaternion& q_des, const UnitQuaternion& q, const Vec3& k_att) {
  return -k_att.cwiseProduct(attitude_error(q_des, q));
}

Mat3 iags_gain(const Mat3& j_a, const Mat3& j_t_hat) {
  validate_inertia(j_a);
  return j_a.ldlt().solve(j_t_hat);
}

Vec3 RateController::step(const Vec3& omega_des, const Vec3& omega, const Gains& gains,
                          const Vec3& k_k_diag, double dt) {
  const Vec3 e = omega_des - omega;
  if (!primed_) {
    prev_error_ = e;
    primed_ = true;
  }
  const Vec3 raw_d = (e - prev_error_) / dt;
  const double k = 1.0 - std::exp(-2.0 * kPi * gains.d_lpf_cutoff_hz * dt);
  d_filtered_ += k * (raw_d - d_filtered_);
  prev_error_ = e;

  integral_ += gains.k_i_rate.cwiseProduct(e) * dt;
  const double n = integral_.norm();
  if (n > gains.i_limit) integral_ *= gains.i_limit / n;

  const Vec3 pid = gains.k_p_rate.cwiseProduct(e) + integral_ + gains.k_d_rate.cwiseProduct(d_filtered_);
  return pid.cwiseProduct(k_k_diag);
}

void RateController::reset() { *this = RateController{}; }

Eigen::Matrix4d allocation_matrix(const RotorConfig& cfg) {
  Eigen::Matrix4d a;
  for (int i = 0; i < 4; ++i) {
    const Vec3& r = cfg.positions[i];
    a(0, i) = 1.0;
    a(1, i) = r.y();
    a(2, i) = -r.x();
    a(3, i) = cfg.spin_dirs[i] * cfg.k_tau;
  }
  return a;
}

namespace {

// Feasible collective interval for t = T * col + t_tau with 0 <= t_i <= t_max.
std::pair<double, double> collective_range(const RotorVec& col, const RotorVec& t_tau,
                                           double t_max) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    if (col(i) > 0.0) {
      lo = std::max(lo, -t_tau(i) / col(i));
      hi = std::min(hi, (t_max - t_tau(i)) / col(i));
    } else if (col(i) < 0.0) {
      lo = std::max(lo, (t_max - t_tau(i)) / col(i));
      hi = std::min(hi, -t_tau(i) / col(i));
    } else if (t_tau(i) < 0.0 || t_tau(i) > t_max) {
      return {1.0, 0.0};
    }
  }
  return {lo, hi};
}

}  // namespace

MixerResult mixer(double thrust_des, const Vec3& torque_des, const RotorConfig& cfg) {
  const Eigen::Matrix4d a = allocation_matrix(cfg);
  const auto lu = a.partialPivLu();
  const RotorVec col = lu.solve(RotorVec(1.0, 0.0, 0.0, 0.0));
  const RotorVec t_tau = lu.solve(RotorVec(0.0, torque_des.x(), torque_des.y(), torque_des.z()));
  const double t_max = cfg.max_thrust();

  MixerResult out;
  out.thrusts = thrust_des * col + t_tau;
  if ((out.thrusts.array() >= 0.0).all() && (out.thrusts.array() <= t_max).all()) return out;

  out.saturated = true;
  auto [lo, hi] = collective_range(col, t_tau, t_max);
  RotorVec torque_part = t_tau;
  if (lo > hi) {
    out.infeasible = true;
    double s_lo = 0.0, s_hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double s = 0.5 * (s_lo + s_hi);
      const auto [l, h] = collective_range(col, s * t_tau, t_max);
      (l <= h ? s_lo : s_hi) = s;
    }
    torque_part = s_lo * t_tau;
    std::tie(lo, hi) = collective_range(col, torque_part, t_max);
  }
  const double collective = std::clamp(thrust_des, lo, hi);
  out.thrusts = (collective * col + torque_part).cwiseMax(0.0).cwiseMin(t_max);
  return out;
}

}  // namespace ami
