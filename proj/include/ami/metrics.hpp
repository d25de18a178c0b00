#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ami/runlog.hpp"
#include "ami/scenario.hpp"

namespace ami {

struct ChannelStats {
  std::string name;
  double rmse;
  double max_abs;
};

struct ConvergenceBounds {
  double mass_rel = 0.04;  // total mass, relative
  double moi_rel = 0.20;   // each diagonal entry of the total inertia, relative
  double com_abs = 0.002;  // total CoM, m
};

/// Seconds from the grasp latch until each estimate enters and then stays
/// within its bound; empty when it is still outside at the end of the log.
struct ConvergenceTimes {
  double latch_time = 0.0;
  std::optional<double> mass;
  std::optional<double> moi;
  std::optional<double> com;

  bool all() const { return mass && moi && com; }
  /// Throws NeverConverged naming the first channel that did not settle.
  void require() const;
};

struct MetricReport {
  double t0 = 0.0;
  double t1 = 0.0;
  std::size_t samples = 0;
  std::vector<ChannelStats> channels;  // pos_*, att_* (deg), rate_* (rad/s)
  double position_rmse = 0.0;          // norm of the xyz error
  double position_max = 0.0;
  double attitude_rmse_deg = 0.0;
  double attitude_max_deg = 0.0;
  std::optional<ConvergenceTimes> convergence;  // when the log has a grasp latch
  std::optional<double> final_mass_error_pct;   // object mass at the last sample

  const ChannelStats& channel(const std::string& name) const;
};

/// Root-mean-square of a series; an empty series is an error.
double rmse(const std::vector<double>& x);

/// First time (>= t_start) after which |err| <= bound holds for every later
/// sample; empty if the last sample violates the bound.
std::optional<double> settle_time(const std::vector<double>& t, const std::vector<double>& err,
                                  double bound, double t_start);

/// Convergence of total mass, inertia diagonal and CoM against the truth
/// columns of the log, measured from the grasp_latch event and judged on
/// samples up to t_end. Throws InvalidArgument if the log has no latch.
ConvergenceTimes declare_convergence(const RunLog& log, const ConvergenceBounds& bounds = {},
                                     double t_end = 1e300);

/// Tracking statistics over samples with t0 <= t <= t1; convergence is judged
/// up to t1.
MetricReport compute_metrics(const RunLog& log, const MetricWindow& window,
                             const ConvergenceBounds& bounds = {});

/// Human-readable metric summary.
std::string format_report(const MetricReport& r);

/// Violated gates, one line each; empty when all pass.
std::vector<std::string> check_criteria(const MetricReport& r, const Criteria& c);

struct ComparisonRow {
  std::string channel;
  double rmse_a, rmse_b, rmse_delta_pct;
  double max_a, max_b, max_delta_pct;
};

/// Per-channel deltas of b relative to a. Throws MismatchedRuns unless both
/// logs share timestamps and setpoints.
std::vector<ComparisonRow> compare_runs(const RunLog& a, const RunLog& b, const MetricWindow& window);

/// "(↓x%)" for a reduction and "(↑x%)" for an increase, one decimal.
std::string format_delta(double pct);
std::string format_comparison(const std::vector<ComparisonRow>& rows, const std::string& label_a,
                              const std::string& label_b);

struct AblationEntry {
  std::string method;
  std::string group;
  MetricReport report;
};

/// Method x group table of position and attitude RMSE / max error.
std::string format_ablation(const std::vector<AblationEntry>& entries);

/// Runs the four estimation arms (Pre+DOBm, Pre only, DOBm only, Baseline) in
/// two groups, without ("feedforward") and with ("dob-compensated") the
/// observer force compensation. Metrics cover the grasp latch to the end of
/// each log. Entries are group-major; runs are written to *runs if given.
std::vector<AblationEntry> run_ablation(const ScenarioConfig& base,
                                        std::vector<RunResult>* runs = nullptr);

}  // namespace ami
