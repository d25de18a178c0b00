#pragma once

#include <array>
#include <complex>
#include <vector>

#include "ami/delta_arm.hpp"
#include "ami/spatial.hpp"

namespace ami {

/// Scalar rational transfer function; coefficients in ascending powers of s.
class RationalTF {
 public:
  RationalTF(std::vector<double> num, std::vector<double> den);

  const std::vector<double>& num() const { return num_; }
  const std::vector<double>& den() const { return den_; }

  RationalTF operator*(const RationalTF& other) const;

 private:
  std::vector<double> num_;
  std::vector<double> den_;
};

/// num(j omega) / den(j omega). Throws PoleOnAxis when |den(j omega)| < 1e-14.
std::complex<double> freq_response(const RationalTF& tf, double omega);

/// One axis of the angular-rate loop.
struct RateAxisGains {
  double kp;
  double ki;
  double kd;
};

/// K_m (K_d s^2 + K_p s + K_i) k_k / (j s^2 (tau_m s + 1)), with the scalar
/// K_m k_k / j folded into the numerator so the denominator is s^2 + tau_m s^3.
RationalTF open_loop_tf(const RateAxisGains& g, double k_k, double k_m, double tau_m, double j);

/// As open_loop_tf, with the loop gain k_k / j formed as
/// (kk_scale / j_scale) / j_nominal. Equal scales give bit-identical
/// coefficients to the nominal loop.
RationalTF open_loop_tf_scaled(const RateAxisGains& g, double kk_scale, double j_scale,
                               double k_m, double tau_m, double j_nominal);

struct MarginReport {
  double gain_margin_db;   // +inf when the phase never reaches -180 deg in band
  double phase_margin_deg;
  double gain_crossover;   // rad/s
  double phase_crossover;  // rad/s, NaN when gain margin is infinite
};

struct Band {
  double lo = 1.0;
  double hi = 600.0;
  int points = 4000;
};

/// Log-spaced scan with continuous (unwrapped) phase, crossovers refined by
/// bisection in log-frequency. Reports the smallest phase margin over all gain
/// crossovers and the smallest gain margin over all phase crossovers. Throws
/// NoCrossover if |G| never crosses 1 in the band.
MarginReport margins(const RationalTF& tf, const Band& band = {});

/// Rate-loop model shared by the sweeps.
struct RateLoopModel {
  Vec3 kp{0.15, 0.15, 0.2};
  Vec3 ki{0.2, 0.2, 0.1};
  Vec3 kd{0.003, 0.003, 0.0};
  double k_m = 1.0;
  double tau_m = 0.02;
  Vec3 j_nominal{9.2e-3, 10.5e-3, 14.7e-3};

  RateAxisGains axis(int i) const { return {kp(i), ki(i), kd(i)}; }
};

/// Per-axis upper bounds of the co-varied inertia and scheduled-gain scales;
/// both intervals start at 1.
struct UncertaintyBox {
  Vec3 j_hi{3.52, 3.79, 1.61};
  Vec3 kk_hi{3.52, 3.79, 1.61};
};

struct SweepCell {
  int axis;
  int j_index;
  int kk_index;
  double j_scale;
  double kk_scale;
  MarginReport margins;
};

struct SweepResult {
  std::vector<SweepCell> table;          // axis-major, then j_index, then kk_index
  std::array<SweepCell, 3> worst_per_axis;
  SweepCell worst;
};

/// Evaluates margins on a grid_n x grid_n grid of (j scale, k_k scale) per
/// axis. The minimum is taken by phase margin, ties broken by the lower
/// crossover frequency, then by table order. grid_n >= 5 unless the box is
/// degenerate (all bounds 1), in which case grid_n = 1 is accepted.
SweepResult robustness_sweep(const RateLoopModel& model, const UncertaintyBox& box, int grid_n,
                             const Band& band = {});
SweepResult robustness_sweep_serial(const RateLoopModel& model, const UncertaintyBox& box,
                                    int grid_n, const Band& band = {});

struct WorkspacePayload {
  double mass = 0.4;
  Vec3 dims{0.2, 0.2, 0.2};
  double pad_height = 0.01;
};

struct WorkspaceSweepResult {
  Vec3 max_kk = Vec3::Ones();
  std::array<JointVec, 3> argmax_theta{};
  int poses_evaluated = 0;
};

/// Sweeps the joint-limit box on a grid_n^3 grid; at every pose with a valid
/// forward solution, mounts the payload (solid box, top face on the pad) below
/// the end-effector and records diag(J_a^-1 J_t). Returns per-axis maxima.
WorkspaceSweepResult workspace_kk_sweep(const DeltaGeometry& geom, const WorkspacePayload& payload,
                                        const InertialParams& vehicle, int grid_n);
WorkspaceSweepResult workspace_kk_sweep_serial(const DeltaGeometry& geom,
                                               const WorkspacePayload& payload,
                                               const InertialParams& vehicle, int grid_n);

}  // namespace ami
