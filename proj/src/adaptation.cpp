#include "ami/adaptation.hpp"

#include <algorithm>
#include <cmath>

#include "ami/error.hpp"

namespace ami {

DobState dob_step(const DobState& st, const Vec3& accel_world, const Mat3& r_wb,
                  const Vec3& thrust_body, double m_a, const DobConfig& cfg, double dt,
                  bool integrate_mass) {
  if (!(dt > 0.0) || !(m_a > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "dob_step needs dt > 0 and m_a > 0");
  }
  DobState out = st;
  const Vec3 force_world = r_wb * thrust_body;
  if (!st.filters_primed) {
    out.force_filt = force_world;
    out.accel_filt = accel_world;
    out.filters_primed = true;
  } else {
    const double k = 1.0 - std::exp(-2.0 * kPi * cfg.lpf_cutoff_hz * dt);
    out.force_filt += k * (force_world - st.force_filt);
    out.accel_filt += k * (accel_world - st.accel_filt);
  }
  out.ext_force = out.force_filt - m_a * (out.accel_filt + cfg.g * Vec3::UnitZ());

  const double decay = std::exp(-cfg.gain * dt / m_a);
  out.ext_force_obs = st.filters_primed ? out.ext_force + (st.ext_force_obs - out.ext_force) * decay
                                        : out.ext_force;
  if (integrate_mass) {
    const double target = out.ext_force.z() / cfg.g;
    out.m_hat = std::max(0.0, target + (st.m_hat - target) * decay);
  }
  out.last_update = st.last_update + dt;
  return out;
}

std::pair<GraspDetector, bool> detect_grasp(const GraspDetector& d, double ext_force_z, double dt) {
  GraspDetector out = d;
  if (out.triggered) return {out, true};
  if (std::abs(ext_force_z) > out.threshold) {
    out.elapsed_above += dt;
  } else {
    out.elapsed_above = 0.0;
  }
  // Summed sample periods carry rounding; allow a nanosecond of slack.
  if (out.elapsed_above >= out.persistence - 1e-9) out.triggered = true;
  return {out, out.triggered};
}

Mat3 rescale_moi(const Mat3& j_tilde, double m_tilde, double m_hat) {
  if (!(m_tilde > 0.0)) throw Error(ErrorCode::InvalidArgument, "m_tilde must be positive");
  return j_tilde * (m_hat / m_tilde);
}

TotalInertia update_total(const InertialParams& vehicle, const std::optional<PayloadEstimate>& payload,
                          const JointVec& theta, const DeltaGeometry& geom) {
  if (!payload || payload->mass <= 0.0) {
    return {vehicle.mass(), vehicle.com(), vehicle.inertia()};
  }
  const Vec3 p_obj = forward_kin(geom, theta) + payload->grasp_offset;
  const auto c = combine(vehicle.mass(), vehicle.com(), vehicle.inertia(), payload->mass, p_obj,
                         payload->inertia);
  return {c.mass, c.com, c.inertia};
}

}  // namespace ami
