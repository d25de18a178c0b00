#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "ami/error.hpp"
#include "ami/scenario.hpp"

namespace ami {
namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::ConfigError, fmt::format("{}: {}", key, what));
}

void check_keys(const YAML::Node& n, const std::string& where, std::set<std::string> allowed) {
  if (!n.IsMap()) fail(where, "expected a mapping");
  for (const auto& kv : n) {
    const auto k = kv.first.as<std::string>();
    if (!allowed.count(k)) fail(where.empty() ? k : where + "." + k, "unknown key");
  }
}

double get_double(const YAML::Node& n, const std::string& key) {
  try {
    const double v = n.as<double>();
    if (!std::isfinite(v)) fail(key, "must be finite");
    return v;
  } catch (const YAML::Exception&) {
    fail(key, "expected a number");
  }
}

Vec3 get_vec3(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence() || n.size() != 3) fail(key, "expected a list of 3 numbers");
  return {get_double(n[0], key), get_double(n[1], key), get_double(n[2], key)};
}

template <class T>
void read_opt(const YAML::Node& parent, const std::string& where, const char* key, T& out);

template <>
void read_opt(const YAML::Node& p, const std::string& where, const char* key, double& out) {
  if (p[key]) out = get_double(p[key], where + "." + key);
}

template <>
void read_opt(const YAML::Node& p, const std::string& where, const char* key, Vec3& out) {
  if (p[key]) out = get_vec3(p[key], where + "." + key);
}

template <>
void read_opt(const YAML::Node& p, const std::string& where, const char* key, bool& out) {
  if (!p[key]) return;
  try {
    out = p[key].as<bool>();
  } catch (const YAML::Exception&) {
    fail(where + "." + key, "expected true or false");
  }
}

template <>
void read_opt(const YAML::Node& p, const std::string& where, const char* key, int& out) {
  if (!p[key]) return;
  try {
    out = p[key].as<int>();
  } catch (const YAML::Exception&) {
    fail(where + "." + key, "expected an integer");
  }
}

template <>
void read_opt(const YAML::Node& p, const std::string& where, const char* key, std::string& out) {
  if (!p[key]) return;
  try {
    out = p[key].as<std::string>();
  } catch (const YAML::Exception&) {
    fail(where + "." + key, "expected a string");
  }
}

std::optional<double> opt_double(const YAML::Node& p, const std::string& where, const char* key) {
  if (!p[key]) return std::nullopt;
  return get_double(p[key], where + "." + key);
}

MinJerkTrajectory read_waypoints(const YAML::Node& n, const std::string& key, int width) {
  if (!n.IsSequence() || n.size() == 0) fail(key, "expected a non-empty list of waypoints");
  std::vector<Waypoint> wps;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string k = fmt::format("{}[{}]", key, i);
    const int size = n[i].IsSequence() ? static_cast<int>(n[i].size()) : 0;
    if (size != width + 1 && size != 2 * width + 1) {
      fail(k, fmt::format("expected [t, {} values] or [t, {} values, {} velocities]", width, width, width));
    }
    Waypoint w{get_double(n[i][0], k), Eigen::VectorXd(width), {}};
    for (int j = 0; j < width; ++j) w.value(j) = get_double(n[i][j + 1], k);
    if (size == 2 * width + 1) {
      w.velocity.resize(width);
      for (int j = 0; j < width; ++j) w.velocity(j) = get_double(n[i][width + 1 + j], k);
    }
    wps.push_back(std::move(w));
  }
  try {
    return MinJerkTrajectory(std::move(wps));
  } catch (const Error& e) {
    fail(key, e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void read_vehicle(const YAML::Node& n, VehicleConfig& v) {
  check_keys(n, "vehicle", {"mass", "inertia_diag", "com", "body_origin", "rotors"});
  read_opt(n, "vehicle", "mass", v.mass);
  read_opt(n, "vehicle", "inertia_diag", v.inertia_diag);
  read_opt(n, "vehicle", "com", v.com);
  read_opt(n, "vehicle", "body_origin", v.body_origin);
  if (const auto r = n["rotors"]) {
    check_keys(r, "vehicle.rotors", {"arm_offset", "c_T", "k_tau", "K_m", "tau_m"});
    if (r["arm_offset"]) {
      const double a = get_double(r["arm_offset"], "vehicle.rotors.arm_offset");
      v.rotors.positions = {Vec3(a, a, 0.0), Vec3(-a, a, 0.0), Vec3(-a, -a, 0.0), Vec3(a, -a, 0.0)};
    }
    read_opt(r, "vehicle.rotors", "c_T", v.rotors.c_T);
    read_opt(r, "vehicle.rotors", "k_tau", v.rotors.k_tau);
    read_opt(r, "vehicle.rotors", "K_m", v.rotors.K_m);
    read_opt(r, "vehicle.rotors", "tau_m", v.rotors.tau_m);
  }
}

void read_arm(const YAML::Node& n, ArmConfig& a) {
  check_keys(n, "arm", {"base_radius", "platform_radius", "upper_arm_len", "forearm_len",
                        "joint_min_deg", "joint_max_deg", "k_theta", "rate_limit"});
  read_opt(n, "arm", "base_radius", a.geom.base_radius);
  read_opt(n, "arm", "platform_radius", a.geom.platform_radius);
  read_opt(n, "arm", "upper_arm_len", a.geom.upper_arm_len);
  read_opt(n, "arm", "forearm_len", a.geom.forearm_len);
  double lo = std::nan(""), hi = std::nan("");
  read_opt(n, "arm", "joint_min_deg", lo);
  read_opt(n, "arm", "joint_max_deg", hi);
  if (!std::isnan(lo)) a.geom.joint_min.fill(deg2rad(lo));
  if (!std::isnan(hi)) a.geom.joint_max.fill(deg2rad(hi));
  read_opt(n, "arm", "k_theta", a.k_theta);
  read_opt(n, "arm", "rate_limit", a.rate_limit);
}

void read_object(const YAML::Node& n, const std::filesystem::path& base, ObjectConfig& o) {
  check_keys(n, "object", {"label", "catalog", "cloud", "cloud_points", "cloud_noise", "truth",
                           "attach_time", "pad"});
  o.present = true;
  read_opt(n, "object", "label", o.label);
  std::string catalog, cloud;
  read_opt(n, "object", "catalog", catalog);
  read_opt(n, "object", "cloud", cloud);
  o.catalog = resolve(base, catalog);
  o.cloud = resolve(base, cloud);
  read_opt(n, "object", "cloud_points", o.cloud_points);
  read_opt(n, "object", "cloud_noise", o.cloud_noise);
  read_opt(n, "object", "attach_time", o.attach_time);
  read_opt(n, "object", "pad", o.pad);
  const auto t = n["truth"];
  if (!t) fail("object.truth", "required");
  check_keys(t, "object.truth", {"shape", "mass", "dims", "radius", "length", "thickness"});
  std::string shape = "box";
  read_opt(t, "object.truth", "shape", shape);
  read_opt(t, "object.truth", "mass", o.truth.mass);
  if (shape == "box") {
    o.truth.kind = TruthShape::Kind::Box;
    read_opt(t, "object.truth", "dims", o.truth.dims);
  } else if (shape == "cylinder") {
    o.truth.kind = TruthShape::Kind::Cylinder;
    read_opt(t, "object.truth", "radius", o.truth.radius);
    read_opt(t, "object.truth", "length", o.truth.length);
  } else if (shape == "disc") {
    o.truth.kind = TruthShape::Kind::Disc;
    read_opt(t, "object.truth", "radius", o.truth.radius);
    read_opt(t, "object.truth", "thickness", o.truth.length);
  } else {
    fail("object.truth.shape", fmt::format("unknown shape '{}'", shape));
  }
}

void read_gains(const YAML::Node& n, Gains& g) {
  check_keys(n, "gains", {"k_pos", "k_vel", "k_int_pos", "int_limit_pos", "k_att", "k_p_rate",
                          "k_i_rate", "k_d_rate", "d_lpf_cutoff_hz", "i_limit"});
  read_opt(n, "gains", "k_pos", g.k_pos);
  read_opt(n, "gains", "k_vel", g.k_vel);
  read_opt(n, "gains", "k_int_pos", g.k_int_pos);
  read_opt(n, "gains", "int_limit_pos", g.int_limit_pos);
  read_opt(n, "gains", "k_att", g.k_att);
  read_opt(n, "gains", "k_p_rate", g.k_p_rate);
  read_opt(n, "gains", "k_i_rate", g.k_i_rate);
  read_opt(n, "gains", "k_d_rate", g.k_d_rate);
  read_opt(n, "gains", "d_lpf_cutoff_hz", g.d_lpf_cutoff_hz);
  read_opt(n, "gains", "i_limit", g.i_limit);
}

void read_environment(const YAML::Node& n, Environment& env) {
  check_keys(n, "environment", {"g", "accel_noise", "gyro_noise", "wind"});
  read_opt(n, "environment", "g", env.g);
  read_opt(n, "environment", "accel_noise", env.accel_noise);
  read_opt(n, "environment", "gyro_noise", env.gyro_noise);
  if (const auto w = n["wind"]) {
    if (!w.IsSequence()) fail("environment.wind", "expected a list");
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::string k = fmt::format("environment.wind[{}]", i);
      check_keys(w[i], k, {"t", "force"});
      if (!w[i]["t"] || !w[i]["force"]) fail(k, "needs t and force");
      env.wind.push_back({get_double(w[i]["t"], k + ".t"), get_vec3(w[i]["force"], k + ".force")});
    }
  }
}

ScenarioConfig from_yaml(const YAML::Node& root, const std::filesystem::path& base) {
  ScenarioConfig cfg;
  check_keys(root, "", {"name", "seed", "mode", "duration", "rates", "vehicle", "arm", "object",
                        "gains", "dob", "grasp", "environment", "trajectory",
                        "trim_start", "dob_compensation", "log_every", "metrics", "criteria"});
  read_opt(root, "", "name", cfg.name);
  if (root["seed"]) {
    try {
      cfg.seed = root["seed"].as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      fail("seed", "expected a non-negative integer");
    }
  }
  if (root["mode"]) cfg.mode = parse_mode(root["mode"].as<std::string>());
  read_opt(root, "", "duration", cfg.duration);
  read_opt(root, "", "trim_start", cfg.trim_start);
  read_opt(root, "", "dob_compensation", cfg.dob_compensation);
  read_opt(root, "", "log_every", cfg.log_every);

  if (const auto r = root["rates"]) {
    check_keys(r, "rates", {"sim_hz", "control_hz", "dob_hz", "servo_hz"});
    read_opt(r, "rates", "sim_hz", cfg.rates.sim_hz);
    read_opt(r, "rates", "control_hz", cfg.rates.control_hz);
    read_opt(r, "rates", "dob_hz", cfg.rates.dob_hz);
    read_opt(r, "rates", "servo_hz", cfg.rates.servo_hz);
  }
  if (const auto v = root["vehicle"]) read_vehicle(v, cfg.vehicle);
  if (const auto a = root["arm"]) read_arm(a, cfg.arm);
  if (const auto o = root["object"]) read_object(o, base, cfg.object);
  if (const auto g = root["gains"]) read_gains(g, cfg.gains);
  if (const auto d = root["dob"]) {
    check_keys(d, "dob", {"gain", "lpf_cutoff_hz"});
    read_opt(d, "dob", "gain", cfg.dob.gain);
    read_opt(d, "dob", "lpf_cutoff_hz", cfg.dob.lpf_cutoff_hz);
  }
  if (const auto g = root["grasp"]) {
    check_keys(g, "grasp", {"threshold", "persistence"});
    read_opt(g, "grasp", "threshold", cfg.grasp.threshold);
    read_opt(g, "grasp", "persistence", cfg.grasp.persistence);
  }
  if (const auto e = root["environment"]) read_environment(e, cfg.env);
  cfg.dob.g = cfg.env.g;

  const auto traj = root["trajectory"];
  if (!traj) fail("trajectory", "required");
  check_keys(traj, "trajectory", {"body", "arm"});
  if (!traj["body"]) fail("trajectory.body", "required");
  cfg.body_traj = read_waypoints(traj["body"], "trajectory.body", 4);
  if (traj["arm"]) cfg.arm_traj = read_waypoints(traj["arm"], "trajectory.arm", 3);

  if (const auto m = root["metrics"]) {
    check_keys(m, "metrics", {"window"});
    if (m["window"]) {
      const auto w = m["window"];
      if (!w.IsSequence() || w.size() != 2) fail("metrics.window", "expected [t0, t1]");
      cfg.window = {get_double(w[0], "metrics.window"), get_double(w[1], "metrics.window")};
    }
  }
  if (const auto c = root["criteria"]) {
    check_keys(c, "criteria", {"max_position_rmse", "max_attitude_rmse_deg",
                               "max_mass_error_pct", "max_convergence_s"});
    cfg.criteria.max_position_rmse = opt_double(c, "criteria", "max_position_rmse");
    cfg.criteria.max_attitude_rmse_deg = opt_double(c, "criteria", "max_attitude_rmse_deg");
    cfg.criteria.max_mass_error_pct = opt_double(c, "criteria", "max_mass_error_pct");
    cfg.criteria.max_convergence_s = opt_double(c, "criteria", "max_convergence_s");
  }
  cfg.validate();
  return cfg;
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Baseline: return "baseline";
    case Mode::Iags: return "iags";
    case Mode::IagsDob: return "iags+dob";
    case Mode::PreOnly: return "pre-only";
    case Mode::DobOnly: return "dob-only";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::Baseline, Mode::Iags, Mode::IagsDob, Mode::PreOnly, Mode::DobOnly}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::ConfigError, fmt::format("mode: unknown mode '{}'", name));
}

namespace {

int divisor(double sim_hz, double hz, const char* key) {
  if (!(hz > 0.0) || hz > sim_hz) fail(key, "must be positive and at most sim_hz");
  const double ratio = sim_hz / hz;
  const double r = std::round(ratio);
  if (std::abs(ratio - r) > 1e-9 * r) fail(key, fmt::format("{} Hz does not divide {} Hz", hz, sim_hz));
  return static_cast<int>(r);
}

}  // namespace

int Rates::control_every() const { return divisor(sim_hz, control_hz, "rates.control_hz"); }
int Rates::dob_every() const { return divisor(sim_hz, dob_hz, "rates.dob_hz"); }
int Rates::servo_every() const { return divisor(sim_hz, servo_hz, "rates.servo_hz"); }

void Rates::validate() const {
  if (!(sim_hz >= 200.0)) fail("rates.sim_hz", "must be at least 200 Hz");
  control_every();
  dob_every();
  servo_every();
}

InertialParams VehicleConfig::params() const {
  return InertialParams(mass, com, inertia_diag.asDiagonal().toDenseMatrix());
}

void ScenarioConfig::validate() const {
  rates.validate();
  if (!(duration > 0.0)) fail("duration", "must be positive");
  if (log_every < 1) fail("log_every", "must be at least 1");
  if (!(window.t1 > window.t0)) fail("metrics.window", "t1 must exceed t0");
  try {
    vehicle.params();
    vehicle.rotors.validate();
    arm.geom.validate();
    gains.validate();
  } catch (const Error& e) {
    fail(name, e.what());
  }
  if (!(arm.rate_limit > 0.0)) fail("arm.rate_limit", "must be positive");
  if (!(dob.gain > 0.0) || !(dob.lpf_cutoff_hz > 0.0)) fail("dob", "gain and cutoff must be positive");
  if (!(grasp.threshold > 0.0) || !(grasp.persistence >= 0.0)) {
    fail("grasp", "threshold must be positive and persistence non-negative");
  }
  if (env.accel_noise < 0.0 || env.gyro_noise < 0.0) fail("environment", "noise must be >= 0");
  if (body_traj.empty()) fail("trajectory.body", "required");
  if (object.present) {
    if (!(object.truth.mass > 0.0)) fail("object.truth.mass", "must be positive");
    if (object.label.empty()) fail("object.label", "required");
    if (object.catalog.empty()) fail("object.catalog", "required");
    if (object.pad < 0.0) fail("object.pad", "must be >= 0");
    try {
      validate_inertia(object.truth.inertia());
    } catch (const Error& e) {
      fail("object.truth", e.what());
    }
  } else if (mode != Mode::Baseline && mode != Mode::Iags) {
    fail("mode", "estimation modes need an object");
  }
}

ScenarioConfig parse_config(const std::string& yaml, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("yaml: {}", e.what()));
  }
  return from_yaml(root, base_dir);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace ami
