#include "ami/margin_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "ami/error.hpp"

namespace ami {
namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::ConfigError, fmt::format("{}: {}", key, what));
}

void only(const YAML::Node& n, const std::string& where, std::initializer_list<const char*> keys) {
  if (!n.IsMap()) fail(where, "expected a mapping");
  for (const auto& kv : n) {
    const auto k = kv.first.as<std::string>();
    if (std::find_if(keys.begin(), keys.end(), [&](const char* a) { return k == a; }) == keys.end()) {
      fail(where.empty() ? k : where + "." + k, "unknown key");
    }
  }
}

void vec(const YAML::Node& n, const std::string& key, Vec3& out) {
  if (!n) return;
  if (!n.IsSequence() || n.size() != 3) fail(key, "expected a list of 3 numbers");
  try {
    for (int i = 0; i < 3; ++i) out(i) = n[i].as<double>();
  } catch (const YAML::Exception&) {
    fail(key, "expected numbers");
  }
}

template <class T>
void scalar(const YAML::Node& n, const std::string& key, T& out) {
  if (!n) return;
  try {
    out = n.as<T>();
  } catch (const YAML::Exception&) {
    fail(key, "wrong type");
  }
}

}  // namespace

MarginConfig parse_margin_config(const std::string& yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("yaml: {}", e.what()));
  }
  MarginConfig c;
  if (root.IsNull()) return c;
  only(root, "", {"rate_gains", "motor", "inertia_diag", "band", "uncertainty"});
  if (const auto g = root["rate_gains"]) {
    only(g, "rate_gains", {"kp", "ki", "kd"});
    vec(g["kp"], "rate_gains.kp", c.model.kp);
    vec(g["ki"], "rate_gains.ki", c.model.ki);
    vec(g["kd"], "rate_gains.kd", c.model.kd);
  }
  if (const auto m = root["motor"]) {
    only(m, "motor", {"K_m", "tau_m"});
    scalar(m["K_m"], "motor.K_m", c.model.k_m);
    scalar(m["tau_m"], "motor.tau_m", c.model.tau_m);
  }
  vec(root["inertia_diag"], "inertia_diag", c.model.j_nominal);
  if (const auto b = root["band"]) {
    only(b, "band", {"lo", "hi", "points"});
    scalar(b["lo"], "band.lo", c.band.lo);
    scalar(b["hi"], "band.hi", c.band.hi);
    scalar(b["points"], "band.points", c.band.points);
  }
  if (const auto u = root["uncertainty"]) {
    only(u, "uncertainty", {"j_hi", "kk_hi", "grid"});
    vec(u["j_hi"], "uncertainty.j_hi", c.box.j_hi);
    vec(u["kk_hi"], "uncertainty.kk_hi", c.box.kk_hi);
    scalar(u["grid"], "uncertainty.grid", c.grid_n);
  }
  if (!(c.band.lo > 0.0 && c.band.hi > c.band.lo && c.band.points >= 2)) fail("band", "invalid");
  if (!(c.model.j_nominal.array() > 0.0).all()) fail("inertia_diag", "must be positive");
  if (!(c.model.tau_m > 0.0)) fail("motor.tau_m", "must be positive");
  return c;
}

MarginConfig load_margin_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_margin_config(ss.str());
}

}  // namespace ami
