#pragma once

#include <optional>
#include <utility>

#include "ami/delta_arm.hpp"
#include "ami/spatial.hpp"

namespace ami {

struct DobConfig {
  double gain = 10.0;        // c
  double lpf_cutoff_hz = 50.0;
  double g = 9.81;
};

/// Disturbance-observer state. ext_force is the filtered world-frame force the
/// unloaded vehicle model cannot explain: R*T - m_a*(a + g e3).
struct DobState {
  double m_hat = 0.0;
  Vec3 force_filt = Vec3::Zero();  // filtered R*T, world
  Vec3 accel_filt = Vec3::Zero();  // filtered CoM acceleration, world
  Vec3 ext_force = Vec3::Zero();
  Vec3 ext_force_obs = Vec3::Zero();  // ext_force through the observer's first-order lag
  double last_update = 0.0;
  bool filters_primed = false;
};

/// Low-pass both measurements, then advance m_hat along
///   m_hat_dot * g = (c / m_a) * (ext_force_z - m_hat * g)
/// with the exact zero-order-hold update for the interval dt. ext_force_obs
/// follows ext_force with the same time constant m_a / c. When
/// integrate_mass is false m_hat is left untouched (pre-grasp).
DobState dob_step(const DobState& st, const Vec3& accel_world, const Mat3& r_wb,
                  const Vec3& thrust_body, double m_a, const DobConfig& cfg, double dt,
                  bool integrate_mass = true);

struct GraspDetector {
  double threshold = 1.0;    // N
  double persistence = 0.5;  // s
  double elapsed_above = 0.0;
  bool triggered = false;
};

/// Accumulates time while |ext_force_z| exceeds the threshold (reset when it
/// drops below) and latches once the run lasts `persistence` seconds.
std::pair<GraspDetector, bool> detect_grasp(const GraspDetector& d, double ext_force_z, double dt);

/// j_tilde scaled by m_hat / m_tilde.
Mat3 rescale_moi(const Mat3& j_tilde, double m_tilde, double m_hat);

/// Payload as seen by the estimator: mass, inertia about its CoM in frame M
/// axes (may be zero for a point mass) and the offset from the end-effector
/// origin to the payload CoM.
struct PayloadEstimate {
  double mass = 0.0;
  Mat3 inertia = Mat3::Zero();
  Vec3 grasp_offset = Vec3::Zero();
};

struct TotalInertia {
  double mass;
  Vec3 com;      // frame M
  Mat3 inertia;  // about com
};

/// Vehicle (mass m_a, CoM p_B in M, inertia J_a) plus the payload carried at
/// forward_kin(theta) + grasp_offset. Without a payload (or zero mass) returns
/// the vehicle unchanged.
TotalInertia update_total(const InertialParams& vehicle, const std::optional<PayloadEstimate>& payload,
                          const JointVec& theta, const DeltaGeometry& geom);

}  // namespace ami
