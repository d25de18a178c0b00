#include "ami/freqdom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ami/adaptation.hpp"
#include "ami/controller.hpp"
#include "ami/error.hpp"
#include "ami/presense.hpp"

namespace ami {
namespace {

using cd = std::complex<double>;

cd polyval(const std::vector<double>& c, cd s) {
  cd acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
  return acc;
}

std::vector<double> polymul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

constexpr double kTwoPi = 2.0 * kPi;

double unwrap_near(double raw, double ref) {
  return raw + kTwoPi * std::round((ref - raw) / kTwoPi);
}

// Phase as omega -> 0+, from the lowest-order nonzero coefficients.
double low_frequency_phase(const RationalTF& tf) {
  auto lowest = [](const std::vector<double>& c) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] != 0.0) return i;
    }
    return c.size();
  };
  const std::size_t kn = lowest(tf.num());
  const std::size_t kd = lowest(tf.den());
  double phase = (static_cast<double>(kn) - static_cast<double>(kd)) * 0.5 * kPi;
  if (kn < tf.num().size() && tf.num()[kn] / tf.den()[kd] < 0.0) phase -= kPi;
  return phase;
}

struct Sample {
  double log_w;
  double log_mag;
  double phase;  // unwrapped, rad
};

Sample sample_at(const RationalTF& tf, double log_w, double phase_ref) {
  const cd g = freq_response(tf, std::exp(log_w));
  return {log_w, std::log(std::abs(g)), unwrap_near(std::arg(g), phase_ref)};
}

// Bisection on log-frequency for a sign change of f between a and b.
template <class F>
Sample bisect(const RationalTF& tf, Sample a, Sample b, F f) {
  const double fa = f(a);
  for (int it = 0; it < 200; ++it) {
    if (b.log_w - a.log_w < 1e-13) break;
    const double mid = 0.5 * (a.log_w + b.log_w);
    const Sample m = sample_at(tf, mid, 0.5 * (a.phase + b.phase));
    if ((f(m) < 0.0) == (fa < 0.0)) {
      a = m;
    } else {
      b = m;
    }
  }
  return sample_at(tf, 0.5 * (a.log_w + b.log_w), 0.5 * (a.phase + b.phase));
}

}  // namespace

RationalTF::RationalTF(std::vector<double> num, std::vector<double> den)
    : num_(std::move(num)), den_(std::move(den)) {
  while (den_.size() > 1 && den_.back() == 0.0) den_.pop_back();
  while (num_.size() > 1 && num_.back() == 0.0) num_.pop_back();
  if (num_.empty() || den_.empty() || den_.back() == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "transfer function needs a nonzero denominator");
  }
  for (double c : num_) {
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite coefficient");
  }
  for (double c : den_) {
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite coefficient");
  }
}

RationalTF RationalTF::operator*(const RationalTF& o) const {
  return RationalTF(polymul(num_, o.num_), polymul(den_, o.den_));
}

std::complex<double> freq_response(const RationalTF& tf, double omega) {
  if (!(omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega must be positive");
  const cd s(0.0, omega);
  const cd d = polyval(tf.den(), s);
  if (std::abs(d) < 1e-14) throw Error(ErrorCode::PoleOnAxis, "pole on the imaginary axis");
  return polyval(tf.num(), s) / d;
}

RationalTF open_loop_tf(const RateAxisGains& g, double k_k, double k_m, double tau_m, double j) {
  if (!(j > 0.0) || !(tau_m > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "open_loop_tf needs j > 0 and tau_m > 0");
  }
  const double scale = k_m * (k_k / j);
  return RationalTF({scale * g.ki, scale * g.kp, scale * g.kd}, {0.0, 0.0, 1.0, tau_m});
}

RationalTF open_loop_tf_scaled(const RateAxisGains& g, double kk_scale, double j_scale,
                               double k_m, double tau_m, double j_nominal) {
  if (!(j_scale > 0.0) || !(j_nominal > 0.0) || !(tau_m > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "open_loop_tf_scaled needs positive scales");
  }
  const double scale = k_m * ((kk_scale / j_scale) / j_nominal);
  return RationalTF({scale * g.ki, scale * g.kp, scale * g.kd}, {0.0, 0.0, 1.0, tau_m});
}

MarginReport margins(const RationalTF& tf, const Band& band) {
  if (!(band.lo > 0.0 && band.hi > band.lo) || band.points < 2) {
    throw Error(ErrorCode::InvalidArgument, "invalid frequency band");
  }
  const double log_lo = std::log(band.lo);
  const double log_hi = std::log(band.hi);

  // Track the phase continuously from four decades below the band.
  const int lead = 400;
  const double log_start = log_lo - 4.0 * std::log(10.0);
  double phase = low_frequency_phase(tf);
  for (int i = 0; i < lead; ++i) {
    const double lw = log_start + (log_lo - log_start) * i / lead;
    phase = sample_at(tf, lw, phase).phase;
  }

  std::vector<Sample> scan;
  scan.reserve(band.points);
  for (int i = 0; i < band.points; ++i) {
    const double lw = log_lo + (log_hi - log_lo) * i / (band.points - 1);
    const Sample s = sample_at(tf, lw, phase);
    phase = s.phase;
    scan.push_back(s);
  }

  MarginReport rep{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN()};
  bool found_gc = false;
  const auto mag_fn = [](const Sample& s) { return s.log_mag; };

  for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
    const Sample& a = scan[i];
    const Sample& b = scan[i + 1];

    if ((a.log_mag > 0.0) != (b.log_mag > 0.0) || a.log_mag == 0.0) {
      const Sample c = a.log_mag == 0.0 ? a : bisect(tf, a, b, mag_fn);
      const double pm = 180.0 + c.phase * 180.0 / kPi;
      if (!found_gc || pm < rep.phase_margin_deg) {
        rep.phase_margin_deg = pm;
        rep.gain_crossover = std::exp(c.log_w);
      }
      found_gc = true;
    }

    // Phase crossings of -180 deg (mod 360).
    const double qa = std::floor((a.phase + kPi) / kTwoPi);
    const double qb = std::floor((b.phase + kPi) / kTwoPi);
    if (qa != qb) {
      const double target = std::max(qa, qb) * kTwoPi - kPi;
      const Sample c = bisect(tf, a, b, [target](const Sample& s) { return s.phase - target; });
      const double gm = -20.0 * c.log_mag / std::log(10.0);
      if (gm < rep.gain_margin_db) {
        rep.gain_margin_db = gm;
        rep.phase_crossover = std::exp(c.log_w);
      }
    }
  }
  if (!found_gc) throw Error(ErrorCode::NoCrossover, "|G| does not cross unity in the band");
  return rep;
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

void check_sweep_args(const UncertaintyBox& box, int grid_n) {
  const bool degenerate = (box.j_hi.array() == 1.0).all() && (box.kk_hi.array() == 1.0).all();
  if (!((box.j_hi.array() >= 1.0).all() && (box.kk_hi.array() >= 1.0).all())) {
    throw Error(ErrorCode::InvalidArgument, "uncertainty bounds must be >= 1");
  }
  if (grid_n < 5 && !(degenerate && grid_n >= 1)) {
    throw Error(ErrorCode::InvalidArgument, "grid_n must be at least 5");
  }
}

bool better(const SweepCell& a, const SweepCell& b) {
  if (a.margins.phase_margin_deg != b.margins.phase_margin_deg) {
    return a.margins.phase_margin_deg < b.margins.phase_margin_deg;
  }
  return a.margins.gain_crossover < b.margins.gain_crossover;
}

SweepCell evaluate_cell(const RateLoopModel& model, const UncertaintyBox& box, int grid_n,
                        const Band& band, int flat) {
  const int axis = flat / (grid_n * grid_n);
  const int ji = (flat / grid_n) % grid_n;
  const int ki = flat % grid_n;
  const double js = linspace(1.0, box.j_hi(axis), grid_n)[ji];
  const double ks = linspace(1.0, box.kk_hi(axis), grid_n)[ki];
  const RationalTF tf = open_loop_tf_scaled(model.axis(axis), ks, js, model.k_m, model.tau_m,
                                            model.j_nominal(axis));
  return {axis, ji, ki, js, ks, margins(tf, band)};
}

SweepResult reduce_sweep(std::vector<SweepCell> table, int grid_n) {
  SweepResult r;
  r.table = std::move(table);
  const std::size_t per_axis = static_cast<std::size_t>(grid_n) * grid_n;
  for (int axis = 0; axis < 3; ++axis) {
    SweepCell best = r.table[axis * per_axis];
    for (std::size_t i = 1; i < per_axis; ++i) {
      const SweepCell& c = r.table[axis * per_axis + i];
      if (better(c, best)) best = c;
    }
    r.worst_per_axis[axis] = best;
  }
  r.worst = r.worst_per_axis[0];
  for (int axis = 1; axis < 3; ++axis) {
    if (better(r.worst_per_axis[axis], r.worst)) r.worst = r.worst_per_axis[axis];
  }
  return r;
}

}  // namespace

SweepResult robustness_sweep_serial(const RateLoopModel& model, const UncertaintyBox& box,
                                    int grid_n, const Band& band) {
  check_sweep_args(box, grid_n);
  const int total = 3 * grid_n * grid_n;
  std::vector<SweepCell> table;
  table.reserve(total);
  for (int flat = 0; flat < total; ++flat) {
    table.push_back(evaluate_cell(model, box, grid_n, band, flat));
  }
  return reduce_sweep(std::move(table), grid_n);
}

SweepResult robustness_sweep(const RateLoopModel& model, const UncertaintyBox& box, int grid_n,
                             const Band& band) {
  check_sweep_args(box, grid_n);
  const int total = 3 * grid_n * grid_n;
  std::vector<SweepCell> table(total);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (int flat = 0; flat < total; ++flat) {
    try {
      table[flat] = evaluate_cell(model, box, grid_n, band, flat);
    } catch (...) {
#pragma omp critical(ami_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return reduce_sweep(std::move(table), grid_n);
}

namespace {

struct PoseKk {
  bool valid = false;
  Vec3 kk = Vec3::Ones();
};

JointVec grid_theta(const DeltaGeometry& geom, int grid_n, int flat) {
  const int idx[3] = {flat / (grid_n * grid_n), (flat / grid_n) % grid_n, flat % grid_n};
  JointVec theta;
  for (int j = 0; j < 3; ++j) {
    const double t = grid_n == 1 ? 0.5 : static_cast<double>(idx[j]) / (grid_n - 1);
    theta(j) = geom.joint_min[j] + t * (geom.joint_max[j] - geom.joint_min[j]);
  }
  return theta;
}

PoseKk evaluate_pose(const DeltaGeometry& geom, const PayloadEstimate& payload,
                     const InertialParams& vehicle, const JointVec& theta) {
  PoseKk out;
  try {
    const TotalInertia tot = update_total(vehicle, payload, theta, geom);
    out.kk = iags_gain(vehicle.inertia(), tot.inertia).diagonal();
    out.valid = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoIntersection) throw;
  }
  return out;
}

PayloadEstimate workspace_payload(const WorkspacePayload& p) {
  if (p.mass < 0.0 || !(p.dims.array() > 0.0).all()) {
    throw Error(ErrorCode::InvalidArgument, "payload needs mass >= 0 and positive dims");
  }
  return {p.mass, synth::solid_box_inertia(p.mass, p.dims),
          Vec3(0.0, 0.0, -0.5 * p.dims.z() - p.pad_height)};
}

WorkspaceSweepResult reduce_poses(const DeltaGeometry& geom, const std::vector<PoseKk>& poses,
                                  int grid_n) {
  WorkspaceSweepResult r;
  bool any = false;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (!poses[i].valid) continue;
    ++r.poses_evaluated;
    for (int a = 0; a < 3; ++a) {
      if (!any || poses[i].kk(a) > r.max_kk(a)) {
        r.max_kk(a) = poses[i].kk(a);
        r.argmax_theta[a] = grid_theta(geom, grid_n, static_cast<int>(i));
      }
    }
    any = true;
  }
  if (!any) throw Error(ErrorCode::NoIntersection, "no reachable pose on the sweep grid");
  return r;
}

}  // namespace

WorkspaceSweepResult workspace_kk_sweep_serial(const DeltaGeometry& geom,
                                               const WorkspacePayload& payload,
                                               const InertialParams& vehicle, int grid_n) {
  geom.validate();
  if (grid_n < 1) throw Error(ErrorCode::InvalidArgument, "grid_n must be positive");
  const PayloadEstimate pe = workspace_payload(payload);
  const int total = grid_n * grid_n * grid_n;
  std::vector<PoseKk> poses(total);
  for (int flat = 0; flat < total; ++flat) {
    poses[flat] = evaluate_pose(geom, pe, vehicle, grid_theta(geom, grid_n, flat));
  }
  return reduce_poses(geom, poses, grid_n);
}

WorkspaceSweepResult workspace_kk_sweep(const DeltaGeometry& geom, const WorkspacePayload& payload,
                                        const InertialParams& vehicle, int grid_n) {
  geom.validate();
  if (grid_n < 1) throw Error(ErrorCode::InvalidArgument, "grid_n must be positive");
  const PayloadEstimate pe = workspace_payload(payload);
  const int total = grid_n * grid_n * grid_n;
  std::vector<PoseKk> poses(total);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (int flat = 0; flat < total; ++flat) {
    try {
      poses[flat] = evaluate_pose(geom, pe, vehicle, grid_theta(geom, grid_n, flat));
    } catch (...) {
#pragma omp critical(ami_workspace_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return reduce_poses(geom, poses, grid_n);
}

}  // namespace ami
