#include "ami/scenario.hpp"

#include <cmath>
#include <exception>

#include <fmt/format.h>

#include "ami/error.hpp"

namespace ami {

Mat3 TruthShape::inertia() const {
  switch (kind) {
    case Kind::Box:
      return synth::solid_box_inertia(mass, dims);
    case Kind::Cylinder:
      return synth::solid_cylinder_inertia(mass, radius, length);
    case Kind::Disc: {
      const double side = mass * (3.0 * radius * radius + length * length) / 12.0;
      return Vec3(side, side, 0.5 * mass * radius * radius).asDiagonal();
    }
  }
  return Mat3::Zero();
}

double TruthShape::height() const {
  switch (kind) {
    case Kind::Box: return dims.z();
    case Kind::Cylinder: return 2.0 * radius;
    case Kind::Disc: return length;
  }
  return 0.0;
}

PointCloud TruthShape::surface_cloud(int n, std::mt19937_64& rng) const {
  switch (kind) {
    case Kind::Box:
      return synth::box_surface_cloud(dims, n, rng);
    case Kind::Cylinder:
      return synth::cylinder_surface_cloud(radius, length, n, rng);
    case Kind::Disc: {
      const Mat3 x_to_z = Eigen::AngleAxisd(-0.5 * kPi, Vec3::UnitY()).toRotationMatrix();
      return synth::transformed(synth::cylinder_surface_cloud(radius, length, n, rng), x_to_z,
                                Vec3::Zero());
    }
  }
  return {};
}

const std::vector<std::string>& log_columns() {
  static const std::vector<std::string> cols = {
      "t",        "x",        "y",        "z",         "x_des",     "y_des",     "z_des",
      "vx",       "vy",       "vz",       "roll",      "pitch",     "yaw",       "e_att_x",
      "e_att_y",  "e_att_z",  "wx",       "wy",        "wz",        "wx_des",    "wy_des",
      "wz_des",   "mt_hat",   "mt_true",  "mo_hat",    "mo_true",   "jt_hat_x",  "jt_hat_y",
      "jt_hat_z", "jt_true_x", "jt_true_y", "jt_true_z", "ct_hat_x", "ct_hat_y", "ct_hat_z",
      "ct_true_x", "ct_true_y", "ct_true_z", "kk_x",     "kk_y",      "kk_z",      "tau_x",
      "tau_y",    "tau_z",    "thrust_des", "fext_x",   "fext_y",    "fext_z",    "theta_1",
      "theta_2",  "theta_3",  "ee_x",     "ee_y",      "ee_z",      "saturated"};
  return cols;
}

namespace {

constexpr double kRad2Deg = 180.0 / kPi;

struct Payload {
  double mass;
  Mat3 inertia;
  Vec3 offset;
};

UnitQuaternion yaw_quaternion(double yaw) {
  return UnitQuaternion(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

Vec3 roll_pitch_yaw(const Mat3& r) {
  return {std::atan2(r(2, 1), r(2, 2)), std::asin(std::clamp(-r(2, 0), -1.0, 1.0)),
          std::atan2(r(1, 0), r(0, 0))};
}

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg)
      : cfg_(cfg),
        vehicle_(cfg.vehicle.params()),
        rng_(cfg.seed),
        log_(log_columns()) {}

  RunResult run();

 private:
  TotalInertia truth_total() const {
    std::optional<PayloadEstimate> p;
    if (attached_) p = PayloadEstimate{true_payload_.mass, true_payload_.inertia, true_payload_.offset};
    return update_total(vehicle_, p, joints_.theta, cfg_.arm.geom);
  }

  TotalInertia estimated_total() const {
    return update_total(vehicle_, estimate_, joints_.theta, cfg_.arm.geom);
  }

  Vec3 body_com(const TotalInertia& t) const { return t.com - cfg_.vehicle.body_origin; }

  void presense();
  void attach(double t);
  void latch(double t);
  void refresh_estimate();
  void dob_tick(double t, double dt);
  void servo_tick(double t, double dt);
  void control_tick(double t, double dt);
  void trim();
  void log_row(double t);

  const ScenarioConfig& cfg_;
  InertialParams vehicle_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  RunLog log_;

  VehicleState state_;
  RotorVec thrusts_ = RotorVec::Zero();
  RotorVec thrust_cmd_ = RotorVec::Zero();
  JointState joints_;
  ServoModel servo_;
  TotalInertia truth_{0.0, Vec3::Zero(), Mat3::Zero()};
  Vec3 accel_ = Vec3::Zero();

  Payload true_payload_{0.0, Mat3::Zero(), Vec3::Zero()};
  bool attached_ = false;
  std::optional<ObjectEstimate> presensed_;

  DobState dob_;
  GraspDetector detector_;
  bool latched_ = false;
  std::optional<PayloadEstimate> estimate_;
  TotalInertia est_{0.0, Vec3::Zero(), Mat3::Zero()};

  RateController rate_;
  Vec3 pos_integral_ = Vec3::Zero();
  Vec3 integral_at_onset_ = Vec3::Zero();
  Vec3 kk_ = Vec3::Ones();
  PositionCommand pos_cmd_;
  Vec3 p_des_ = Vec3::Zero();
  Vec3 omega_des_ = Vec3::Zero();
  Vec3 torque_ = Vec3::Zero();
  Vec3 att_err_ = Vec3::Zero();
  bool saturated_ = false;

  long control_ticks_ = 0;
  long dob_ticks_ = 0;
  long servo_ticks_ = 0;
};

void Simulation::presense() {
  const ObjectConfig& o = cfg_.object;
  PointCloud cloud;
  if (!o.cloud.empty()) {
    cloud = read_cloud(o.cloud.string());
  } else {
    std::seed_seq seq{cfg_.seed, std::uint64_t{0x5eed}};
    std::mt19937_64 cloud_rng(seq);
    cloud = synth::with_noise(o.truth.surface_cloud(o.cloud_points, cloud_rng), o.cloud_noise,
                              cloud_rng);
  }
  const PriorCatalog catalog = PriorCatalog::load(o.catalog.string());
  presensed_ = estimate_inertia(fit_obb(cloud), catalog.prior_for(o.label), o.pad);
}

void Simulation::attach(double t) {
  const TotalInertia before = truth_;
  const Vec3 body_origin = state_.p - state_.q * body_com(before);
  attached_ = true;
  truth_ = truth_total();
  state_.p = body_origin + state_.q * body_com(truth_);
  state_.v *= before.mass / truth_.mass;
  log_.add_event(t, "attach", true_payload_.mass);
}

void Simulation::refresh_estimate() {
  if (!latched_) return;
  switch (cfg_.mode) {
    case Mode::Baseline:
      estimate_.reset();
      break;
    case Mode::Iags:
      estimate_ = PayloadEstimate{true_payload_.mass, true_payload_.inertia, true_payload_.offset};
      break;
    case Mode::PreOnly:
      estimate_ = PayloadEstimate{presensed_->mass_tilde, presensed_->moi_in_cloud_frame(),
                                  presensed_->grasp_offset};
      break;
    case Mode::IagsDob:
      estimate_ = PayloadEstimate{
          dob_.m_hat, rescale_moi(presensed_->moi_in_cloud_frame(), presensed_->mass_tilde, dob_.m_hat),
          presensed_->grasp_offset};
      break;
    case Mode::DobOnly:
      estimate_ = PayloadEstimate{dob_.m_hat, Mat3::Zero(), Vec3(0.0, 0.0, -cfg_.object.pad)};
      break;
  }
}

void Simulation::latch(double t) {
  latched_ = true;
  if (cfg_.mode == Mode::IagsDob) dob_.m_hat = presensed_->mass_tilde;
  if (cfg_.mode == Mode::DobOnly) dob_.m_hat = 0.0;
  const Vec3 kk_before = kk_;
  refresh_estimate();
  est_ = estimated_total();
  kk_ = cfg_.mode == Mode::Baseline ? Vec3::Ones()
                                    : Vec3(iags_gain(vehicle_.inertia(), est_.inertia).diagonal());
  // The payload weight is now fed forward: drop what the position integrator
  // absorbed while the detector was waiting, and keep the commanded torque
  // continuous across the gain switch.
  if (cfg_.mode != Mode::Baseline) pos_integral_ = integral_at_onset_;
  rate_.set_integral(rate_.integral().cwiseProduct(kk_before).cwiseQuotient(kk_));
  log_.add_event(t, "grasp_latch", estimate_ ? estimate_->mass : 0.0);
}

void Simulation::dob_tick(double t, double dt) {
  ++dob_ticks_;
  Vec3 accel = accel_;
  if (cfg_.env.accel_noise > 0.0) {
    for (int i = 0; i < 3; ++i) accel(i) += cfg_.env.accel_noise * normal_(rng_);
  }
  const bool integrate = latched_ && (cfg_.mode == Mode::IagsDob || cfg_.mode == Mode::DobOnly);
  dob_ = dob_step(dob_, accel, to_matrix(state_.q), Vec3(0.0, 0.0, thrusts_.sum()),
                  vehicle_.mass(), cfg_.dob, dt, integrate);
  if (integrate) refresh_estimate();
  if (!latched_ && cfg_.object.present) {
    bool fired = false;
    const bool was_above = detector_.elapsed_above > 0.0;
    std::tie(detector_, fired) = detect_grasp(detector_, dob_.ext_force.z(), dt);
    if (!was_above && detector_.elapsed_above > 0.0) integral_at_onset_ = pos_integral_;
    if (fired) latch(t);
  }
}

void Simulation::servo_tick(double t, double dt) {
  ++servo_ticks_;
  if (cfg_.arm_traj.empty()) return;
  const TrajectorySample ref = cfg_.arm_traj.sample(t);
  JointCommand cmd;
  try {
    cmd = joint_command(cfg_.arm.geom, ref.pos, ref.vel, joints_, cfg_.arm.k_theta);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("arm trajectory at t={:.4f}: {}", t, e.what()));
  }
  joints_ = servo_.step(cfg_.arm.geom, joints_, cmd.theta_dot_des, dt);
  // Internal motion moves the body around a fixed system CoM.
  truth_ = truth_total();
}

void Simulation::control_tick(double t, double dt) {
  ++control_ticks_;
  const Mat3 r = to_matrix(state_.q);
  const Vec3 c_b = body_com(truth_);
  Vec3 omega = state_.omega;
  if (cfg_.env.gyro_noise > 0.0) {
    for (int i = 0; i < 3; ++i) omega(i) += cfg_.env.gyro_noise * normal_(rng_);
  }
  const Vec3 p_body = state_.p - r * c_b;
  const Vec3 v_body = state_.v - r * state_.omega.cross(c_b);

  const TrajectorySample ref = cfg_.body_traj.sample(t);
  PositionSetpoint sp;
  sp.p = ref.pos.head<3>();
  sp.v = ref.vel.head<3>();
  sp.a = ref.acc.head<3>();
  sp.yaw = ref.pos(3);
  p_des_ = sp.p;

  if (estimate_) est_ = estimated_total();
  const double m_hat = cfg_.mode == Mode::Baseline ? vehicle_.mass() : est_.mass;

  pos_integral_ += cfg_.gains.k_int_pos.cwiseProduct(sp.p - p_body) * dt;
  pos_integral_ = pos_integral_.cwiseMax(-cfg_.gains.int_limit_pos).cwiseMin(cfg_.gains.int_limit_pos);

  Vec3 extra = Vec3::Zero();
  if (cfg_.dob_compensation && latched_) {
    const double m_o = estimate_ ? estimate_->mass : 0.0;
    const Vec3 modeled = m_o * (dob_.accel_filt + cfg_.env.g * Vec3::UnitZ());
    extra = -(modeled - dob_.ext_force_obs) / m_hat;
  }
  pos_cmd_ = position_loop(sp, p_body, v_body, state_.q, m_hat, cfg_.gains, pos_integral_,
                           cfg_.env.g, 4.0 * cfg_.vehicle.rotors.max_thrust(), extra,
                           yaw_quaternion(sp.yaw));
  att_err_ = attitude_error(pos_cmd_.q_des, state_.q);
  omega_des_ = attitude_loop(pos_cmd_.q_des, state_.q, cfg_.gains.k_att);

  if (estimate_ && cfg_.mode != Mode::Baseline) {
    kk_ = iags_gain(vehicle_.inertia(), est_.inertia).diagonal();
  }
  torque_ = rate_.step(omega_des_, omega, cfg_.gains, kk_, dt);
  const MixerResult mix = mixer(pos_cmd_.thrust_des, torque_, cfg_.vehicle.rotors);
  thrust_cmd_ = mix.thrusts;
  saturated_ = mix.saturated;
}

void Simulation::trim() {
  const double weight = truth_.mass * cfg_.env.g;
  const Vec3 c_b = body_com(truth_);
  // Torque about the rotor centre that balances the thrust acting off the CoM.
  const Vec3 tau_c = c_b.cross(Vec3(0.0, 0.0, weight));
  thrusts_ = mixer(weight, tau_c, cfg_.vehicle.rotors).thrusts;
  thrust_cmd_ = thrusts_;
  if (!cfg_.trim_start) return;
  const double m_hat = cfg_.mode == Mode::Baseline ? vehicle_.mass() : est_.mass;
  pos_integral_ = Vec3(0.0, 0.0, cfg_.env.g * (truth_.mass / m_hat - 1.0));
  rate_.set_integral(tau_c.cwiseQuotient(kk_));
}

void Simulation::log_row(double t) {
  const Mat3 r = to_matrix(state_.q);
  const Vec3 p_body = state_.p - r * body_com(truth_);
  const Vec3 rpy = roll_pitch_yaw(r);
  const double mo_true = attached_ ? true_payload_.mass : 0.0;
  const double mo_hat = estimate_ ? estimate_->mass : 0.0;
  const Vec3 jt_hat = est_.inertia.diagonal();
  const Vec3 jt_true = truth_.inertia.diagonal();
  const Vec3 ee = forward_kin(cfg_.arm.geom, joints_.theta);
  const double e = kRad2Deg;
  log_.append({t,
               p_body.x(), p_body.y(), p_body.z(),
               p_des_.x(), p_des_.y(), p_des_.z(),
               state_.v.x(), state_.v.y(), state_.v.z(),
               rpy.x() * e, rpy.y() * e, rpy.z() * e,
               att_err_.x() * e, att_err_.y() * e, att_err_.z() * e,
               state_.omega.x(), state_.omega.y(), state_.omega.z(),
               omega_des_.x(), omega_des_.y(), omega_des_.z(),
               est_.mass, truth_.mass, mo_hat, mo_true,
               jt_hat.x(), jt_hat.y(), jt_hat.z(),
               jt_true.x(), jt_true.y(), jt_true.z(),
               est_.com.x(), est_.com.y(), est_.com.z(),
               truth_.com.x(), truth_.com.y(), truth_.com.z(),
               kk_.x(), kk_.y(), kk_.z(),
               torque_.x(), torque_.y(), torque_.z(),
               pos_cmd_.thrust_des,
               dob_.ext_force.x(), dob_.ext_force.y(), dob_.ext_force.z(),
               joints_.theta.x(), joints_.theta.y(), joints_.theta.z(),
               ee.x(), ee.y(), ee.z(),
               saturated_ ? 1.0 : 0.0});
}

RunResult Simulation::run() {
  const double dt = cfg_.rates.sim_dt();
  const int ce = cfg_.rates.control_every();
  const int de = cfg_.rates.dob_every();
  const int se = cfg_.rates.servo_every();
  const long steps = std::lround(cfg_.duration * cfg_.rates.sim_hz);
  servo_.rate_limit = cfg_.arm.rate_limit;
  detector_.threshold = cfg_.grasp.threshold;
  detector_.persistence = cfg_.grasp.persistence;

  const Vec3 ee0 = cfg_.arm_traj.empty() ? Vec3(0.0, 0.0, -0.17)
                                         : Vec3(cfg_.arm_traj.sample(0.0).pos);
  try {
    joints_.theta = inverse_kin(cfg_.arm.geom, ee0);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("arm start pose: {}", e.what()));
  }

  if (cfg_.object.present) {
    const TruthShape& s = cfg_.object.truth;
    true_payload_ = {s.mass, s.inertia(), Vec3(0.0, 0.0, -0.5 * s.height() - cfg_.object.pad)};
    presense();
    log_.add_event(0.0, "presense", presensed_->mass_tilde);
  }
  attached_ = cfg_.object.present && cfg_.object.attach_time <= 0.0;
  truth_ = truth_total();
  est_ = estimated_total();

  const TrajectorySample ref0 = cfg_.body_traj.sample(0.0);
  state_.q = yaw_quaternion(ref0.pos(3));
  state_.p = Vec3(ref0.pos.head<3>()) + state_.q * body_com(truth_);
  p_des_ = ref0.pos.head<3>();

  if (attached_) {
    log_.add_event(0.0, "attach", true_payload_.mass);
    latch(0.0);
  }
  trim();

  bool pending_attach = cfg_.object.present && !attached_;
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (pending_attach && t >= cfg_.object.attach_time) {
      attach(t);
      pending_attach = false;
    }
    if (k % de == 0) dob_tick(t, de * dt);
    if (k % se == 0) servo_tick(t, se * dt);
    if (k % ce == 0) control_tick(t, ce * dt);
    if (k % cfg_.log_every == 0) log_row(t);

    thrusts_ = motor_lag_step(thrust_cmd_, thrusts_, cfg_.vehicle.rotors, dt);
    StepInputs in{rotor_wrench(thrusts_, cfg_.vehicle.rotors, body_com(truth_)), truth_.mass,
                  truth_.inertia, cfg_.env.g, cfg_.env.wind_at(t)};
    try {
      accel_ = derivatives(state_, in.wrench, in.mass, in.inertia, in.g, in.ext_force_world).v_dot;
      state_ = step_rk4(state_, in, dt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFinite) throw;
      throw Error(ErrorCode::NonFinite, fmt::format("diverged at t={:.4f} s: {}", t, e.what()));
    }
  }
  return {std::move(log_), control_ticks_, dob_ticks_, servo_ticks_};
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Simulation sim(cfg);
  return sim.run();
}

std::vector<RunResult> run_batch(const std::vector<ScenarioConfig>& cfgs) {
  const int n = static_cast<int>(cfgs.size());
  std::vector<RunResult> out(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      out[i] = run_scenario(cfgs[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace ami
