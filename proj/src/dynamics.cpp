#include "ami/dynamics.hpp"

#include <cmath>

#include "ami/error.hpp"

namespace ami {

void RotorConfig::validate() const {
  if (!(c_T > 0.0)) throw Error(ErrorCode::InvalidArgument, "c_T must be positive");
  if (!(tau_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau_m must be positive");
  if (!(K_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "K_m must be positive");
  for (int i = 0; i < 4; ++i) {
    if (spin_dirs[i] != 1 && spin_dirs[i] != -1) {
      throw Error(ErrorCode::InvalidArgument, "spin directions must be +1 or -1");
    }
    for (int j = i + 1; j < 4; ++j) {
      if ((positions[i] - positions[j]).head<2>().norm() < 1e-6) {
        throw Error(ErrorCode::InvalidArgument, "two rotors share a position");
      }
    }
  }
  Eigen::Matrix<double, 2, 4> xy;
  for (int i = 0; i < 4; ++i) xy.col(i) = positions[i].head<2>() - positions[0].head<2>();
  if (Eigen::JacobiSVD<Eigen::Matrix<double, 2, 4>>(xy).singularValues()(1) < 1e-6) {
    throw Error(ErrorCode::InvalidArgument, "rotors are collinear");
  }
}

double RotorConfig::speed_from_thrust(double thrust) const {
  return thrust <= 0.0 ? 0.0 : std::sqrt(thrust / c_T);
}

Vec3 Environment::wind_at(double t) const {
  Vec3 f = Vec3::Zero();
  for (const auto& w : wind) {
    if (t >= w.t_start) f = w.force;
  }
  return f;
}

Wrench rotor_wrench(const RotorVec& thrusts, const RotorConfig& cfg, const Vec3& com) {
  Wrench w;
  for (int i = 0; i < 4; ++i) {
    const Vec3 t = thrusts(i) * Vec3::UnitZ();
    w.force += t;
    w.torque += (cfg.positions[i] - com).cross(t) + cfg.spin_dirs[i] * cfg.k_tau * t;
  }
  return w;
}

StateDerivative derivatives(const VehicleState& s, const Wrench& w, double m_t, const Mat3& j_t,
                            double g, const Vec3& ext_force_world) {
  StateDerivative d;
  const Mat3 r = s.q.toRotationMatrix();
  d.p_dot = s.v;
  d.v_dot = -g * Vec3::UnitZ() + (r * w.force + ext_force_world) / m_t;
  d.q_dot = quat_derivative(s.q, s.omega);
  d.omega_dot = j_t.ldlt().solve(w.torque - s.omega.cross(j_t * s.omega));
  return d;
}

RotorVec motor_lag_step(const RotorVec& t_des, const RotorVec& t_actual, const RotorConfig& cfg,
                        double dt) {
  const double decay = std::exp(-dt / cfg.tau_m);
  const RotorVec target = cfg.K_m * t_des;
  return target + (t_actual - target) * decay;
}

namespace {

VehicleState advance(const VehicleState& s, const StateDerivative& d, double h) {
  VehicleState out;
  out.p = s.p + h * d.p_dot;
  out.v = s.v + h * d.v_dot;
  out.q = UnitQuaternion(s.q.w() + h * d.q_dot(0), s.q.x() + h * d.q_dot(1),
                         s.q.y() + h * d.q_dot(2), s.q.z() + h * d.q_dot(3));
  out.omega = s.omega + h * d.omega_dot;
  return out;
}

}  // namespace

VehicleState step_rk4(const VehicleState& s, const StepInputs& in, double dt) {
  if (!(dt > 0.0 && dt <= 0.005)) {
    throw Error(ErrorCode::InvalidArgument, "integration step must lie in (0, 5 ms]");
  }
  auto f = [&](const VehicleState& x) {
    return derivatives(x, in.wrench, in.mass, in.inertia, in.g, in.ext_force_world);
  };
  const StateDerivative k1 = f(s);
  const StateDerivative k2 = f(advance(s, k1, 0.5 * dt));
  const StateDerivative k3 = f(advance(s, k2, 0.5 * dt));
  const StateDerivative k4 = f(advance(s, k3, dt));

  VehicleState out;
  const double h6 = dt / 6.0;
  out.p = s.p + h6 * (k1.p_dot + 2.0 * k2.p_dot + 2.0 * k3.p_dot + k4.p_dot);
  out.v = s.v + h6 * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
  const Eigen::Vector4d dq = h6 * (k1.q_dot + 2.0 * k2.q_dot + 2.0 * k3.q_dot + k4.q_dot);
  out.q = UnitQuaternion(s.q.w() + dq(0), s.q.x() + dq(1), s.q.y() + dq(2), s.q.z() + dq(3));
  out.q.normalize();
  out.omega = s.omega + h6 * (k1.omega_dot + 2.0 * k2.omega_dot + 2.0 * k3.omega_dot +
                              k4.omega_dot);

  if (!(out.p.allFinite() && out.v.allFinite() && out.q.coeffs().allFinite() &&
        out.omega.allFinite())) {
    throw Error(ErrorCode::NonFinite, "state diverged during integration");
  }
  return out;
}

}  // namespace ami
