#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ami/adaptation.hpp"
#include "ami/controller.hpp"
#include "ami/delta_arm.hpp"
#include "ami/dynamics.hpp"
#include "ami/presense.hpp"
#include "ami/runlog.hpp"
#include "ami/trajectory.hpp"

namespace ami {

/// baseline: K_k = I and m_a in the position loop.
/// iags: payload parameters known exactly from the latch onwards.
/// iags+dob: pre-sensed prior refined online by the observer.
/// pre-only: pre-sensed prior, no online refinement.
/// dob-only: observer from zero mass, payload treated as a point mass.
enum class Mode { Baseline, Iags, IagsDob, PreOnly, DobOnly };

std::string_view to_string(Mode m);
/// Throws ConfigError for unknown names.
Mode parse_mode(std::string_view name);

struct Rates {
  double sim_hz = 2000.0;
  double control_hz = 400.0;
  double dob_hz = 100.0;
  double servo_hz = 100.0;

  /// Sim steps per tick of each loop. Throws ConfigError unless each rate
  /// divides the sim rate exactly.
  int control_every() const;
  int dob_every() const;
  int servo_every() const;
  double sim_dt() const { return 1.0 / sim_hz; }
  void validate() const;
};

/// Rigid airframe with the arm lumped in. Positions are in frame M (arm base,
/// axes aligned with the body frame).
struct VehicleConfig {
  double mass = 1.379;
  Vec3 inertia_diag{9.2e-3, 10.5e-3, 14.7e-3};
  Vec3 com{0.0, 0.0, 0.03};
  Vec3 body_origin{0.0, 0.0, 0.05};  // rotor centre
  RotorConfig rotors;

  InertialParams params() const;
};

struct ArmConfig {
  DeltaGeometry geom;
  Vec3 k_theta{20.0, 20.0, 20.0};
  double rate_limit = 6.0;  // rad/s
};

/// Ground-truth solid. Cylinders lie on their side with the axis along x;
/// discs lie flat with the axis along z.
struct TruthShape {
  enum class Kind { Box, Cylinder, Disc };
  Kind kind = Kind::Box;
  double mass = 0.0;
  Vec3 dims = Vec3::Zero();  // box
  double radius = 0.0;       // cylinder, disc
  double length = 0.0;       // cylinder length or disc thickness

  Mat3 inertia() const;
  double height() const;
  /// Surface samples centred on the body centre, axes of frame M.
  PointCloud surface_cloud(int n, std::mt19937_64& rng) const;
};

struct ObjectConfig {
  bool present = false;
  std::string label;
  std::filesystem::path catalog;
  std::filesystem::path cloud;  // empty: synthesise from the truth shape
  int cloud_points = 2000;
  double cloud_noise = 0.001;  // m
  TruthShape truth;
  double attach_time = 0.0;  // <= 0: mounted at start
  double pad = 0.01;
};

struct MetricWindow {
  double t0 = 0.0;
  double t1 = 1e300;
};

/// Optional gates evaluated by the CLI; any violation gives exit code 3.
struct Criteria {
  std::optional<double> max_position_rmse;      // m
  std::optional<double> max_attitude_rmse_deg;  // deg
  std::optional<double> max_mass_error_pct;     // |m_hat_o - m_o| / m_o at end
  std::optional<double> max_convergence_s;      // all channels, from latch
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  Mode mode = Mode::IagsDob;
  double duration = 10.0;
  Rates rates;
  VehicleConfig vehicle;
  ArmConfig arm;
  ObjectConfig object;
  Gains gains;
  DobConfig dob;
  GraspDetector grasp;
  Environment env;
  MinJerkTrajectory body_traj;  // [x, y, z, yaw]
  MinJerkTrajectory arm_traj;   // end-effector [x, y, z] in M
  bool trim_start = true;
  bool dob_compensation = false;
  int log_every = 1;
  MetricWindow window;
  Criteria criteria;

  void validate() const;
};

/// YAML scenario file. Relative paths resolve against the file's directory.
/// Throws ConfigError with the offending key.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& yaml, const std::filesystem::path& base_dir = {});

struct RunResult {
  RunLog log;
  long control_ticks = 0;
  long dob_ticks = 0;
  long servo_ticks = 0;
};

/// Fixed-step multirate simulation: physics every sim step, controller at
/// control_hz, observer and servo at their own rates. Throws NonFinite (with
/// the sim time in the message) on divergence.
RunResult run_scenario(const ScenarioConfig& cfg);

/// Runs independent scenarios, in parallel when OpenMP is available. Results
/// are returned in input order.
std::vector<RunResult> run_batch(const std::vector<ScenarioConfig>& cfgs);

/// Column names written by run_scenario, in order.
const std::vector<std::string>& log_columns();

}  // namespace ami
