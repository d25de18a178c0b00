#include "ami/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include <fmt/format.h>

#include "ami/error.hpp"

namespace ami {

void ConvergenceTimes::require() const {
  if (!mass) throw Error(ErrorCode::NeverConverged, "mass estimate never converged");
  if (!moi) throw Error(ErrorCode::NeverConverged, "inertia estimate never converged");
  if (!com) throw Error(ErrorCode::NeverConverged, "CoM estimate never converged");
}

const ChannelStats& MetricReport::channel(const std::string& name) const {
  for (const auto& c : channels) {
    if (c.name == name) return c;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("no channel '{}'", name));
}

double rmse(const std::vector<double>& x) {
  if (x.empty()) throw Error(ErrorCode::InvalidArgument, "rmse of an empty series");
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

std::optional<double> settle_time(const std::vector<double>& t, const std::vector<double>& err,
                                  double bound, double t_start) {
  if (t.size() != err.size()) throw Error(ErrorCode::InvalidArgument, "length mismatch");
  const auto first = std::lower_bound(t.begin(), t.end(), t_start) - t.begin();
  if (first == static_cast<long>(t.size())) return std::nullopt;
  long i = static_cast<long>(t.size()) - 1;
  while (i >= first && std::abs(err[i]) <= bound) --i;
  if (i == static_cast<long>(t.size()) - 1) return std::nullopt;
  return t[i + 1];
}

ConvergenceTimes declare_convergence(const RunLog& log, const ConvergenceBounds& bounds,
                                     double t_end) {
  const LogEvent* latch = log.find_event("grasp_latch");
  if (!latch) throw Error(ErrorCode::InvalidArgument, "log has no grasp_latch event");
  auto t = log.series("t");
  const std::size_t n = std::upper_bound(t.begin(), t.end(), t_end) - t.begin();
  t.resize(n);
  const auto series = [&](const std::string& name) {
    auto s = log.series(name);
    s.resize(n);
    return s;
  };
  ConvergenceTimes out;
  out.latch_time = latch->t;
  const auto rel = [](const std::vector<double>& est, const std::vector<double>& truth) {
    std::vector<double> e(est.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = (est[i] - truth[i]) / truth[i];
    return e;
  };
  const auto since_latch = [&](std::optional<double> ts) -> std::optional<double> {
    if (!ts) return std::nullopt;
    return *ts - latch->t;
  };
  out.mass = since_latch(
      settle_time(t, rel(series("mt_hat"), series("mt_true")), bounds.mass_rel, latch->t));

  std::vector<double> moi_err(t.size(), 0.0), com_err(t.size(), 0.0);
  for (const char* ax : {"x", "y", "z"}) {
    const auto e = rel(series(fmt::format("jt_hat_{}", ax)), series(fmt::format("jt_true_{}", ax)));
    const auto ch = series(fmt::format("ct_hat_{}", ax));
    const auto ct = series(fmt::format("ct_true_{}", ax));
    for (std::size_t i = 0; i < t.size(); ++i) {
      moi_err[i] = std::max(moi_err[i], std::abs(e[i]));
      com_err[i] += (ch[i] - ct[i]) * (ch[i] - ct[i]);
    }
  }
  for (double& c : com_err) c = std::sqrt(c);
  out.moi = since_latch(settle_time(t, moi_err, bounds.moi_rel, latch->t));
  out.com = since_latch(settle_time(t, com_err, bounds.com_abs, latch->t));
  return out;
}

namespace {

std::vector<std::size_t> window_rows(const RunLog& log, const MetricWindow& w) {
  const std::size_t tc = log.column("t");
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < log.rows(); ++r) {
    const double t = log.at(r, tc);
    if (t >= w.t0 && t <= w.t1) rows.push_back(r);
  }
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "metric window contains no samples");
  return rows;
}

struct ChannelDef {
  const char* name;
  const char* value;
  const char* reference;  // nullptr: the value column already holds the error
};

constexpr ChannelDef kChannels[] = {
    {"pos_x", "x", "x_des"},         {"pos_y", "y", "y_des"},         {"pos_z", "z", "z_des"},
    {"att_x", "e_att_x", nullptr},   {"att_y", "e_att_y", nullptr},   {"att_z", "e_att_z", nullptr},
    {"rate_x", "wx", "wx_des"},      {"rate_y", "wy", "wy_des"},      {"rate_z", "wz", "wz_des"},
};

std::vector<double> channel_error(const RunLog& log, const ChannelDef& c,
                                  const std::vector<std::size_t>& rows) {
  const std::size_t v = log.column(c.value);
  const std::size_t ref = c.reference ? log.column(c.reference) : 0;
  std::vector<double> e;
  e.reserve(rows.size());
  for (std::size_t r : rows) e.push_back(log.at(r, v) - (c.reference ? log.at(r, ref) : 0.0));
  return e;
}

double max_abs(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

MetricReport compute_metrics(const RunLog& log, const MetricWindow& window,
                             const ConvergenceBounds& bounds) {
  const auto rows = window_rows(log, window);
  MetricReport r;
  r.t0 = log.at(rows.front(), log.column("t"));
  r.t1 = log.at(rows.back(), log.column("t"));
  r.samples = rows.size();
  std::map<std::string, std::vector<double>> errs;
  for (const auto& c : kChannels) {
    auto e = channel_error(log, c, rows);
    r.channels.push_back({c.name, rmse(e), max_abs(e)});
    errs[c.name] = std::move(e);
  }
  const auto norm_series = [&](const char* a, const char* b, const char* c) {
    std::vector<double> n(rows.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
      n[i] = std::sqrt(errs[a][i] * errs[a][i] + errs[b][i] * errs[b][i] + errs[c][i] * errs[c][i]);
    }
    return n;
  };
  const auto pos = norm_series("pos_x", "pos_y", "pos_z");
  const auto att = norm_series("att_x", "att_y", "att_z");
  r.position_rmse = rmse(pos);
  r.position_max = max_abs(pos);
  r.attitude_rmse_deg = rmse(att);
  r.attitude_max_deg = max_abs(att);

  if (log.find_event("grasp_latch")) r.convergence = declare_convergence(log, bounds, window.t1);
  const double mo_true = log.at(log.rows() - 1, log.column("mo_true"));
  const auto mo_series = log.series("mo_hat");
  const bool estimated = std::any_of(mo_series.begin(), mo_series.end(), [](double m) { return m > 0.0; });
  if (mo_true > 0.0 && estimated) {
    const double mo_hat = log.at(log.rows() - 1, log.column("mo_hat"));
    r.final_mass_error_pct = 100.0 * (mo_hat - mo_true) / mo_true;
  }
  return r;
}

std::string format_report(const MetricReport& r) {
  std::string s = fmt::format("window [{:.3f}, {:.3f}] s, {} samples\n", r.t0, r.t1, r.samples);
  s += fmt::format("{:<10} {:>14} {:>14}\n", "channel", "rmse", "max");
  for (const auto& c : r.channels) s += fmt::format("{:<10} {:>14.6g} {:>14.6g}\n", c.name, c.rmse, c.max_abs);
  s += fmt::format("position   {:>14.6g} {:>14.6g}  m\n", r.position_rmse, r.position_max);
  s += fmt::format("attitude   {:>14.6g} {:>14.6g}  deg\n", r.attitude_rmse_deg, r.attitude_max_deg);
  if (r.final_mass_error_pct) s += fmt::format("final object mass error {:+.3f} %\n", *r.final_mass_error_pct);
  if (r.convergence) {
    const auto show = [](const std::optional<double>& v) {
      return v ? fmt::format("{:.3f} s", *v) : std::string("never");
    };
    s += fmt::format("latch at {:.3f} s; converged: mass {}, inertia {}, com {}\n",
                     r.convergence->latch_time, show(r.convergence->mass), show(r.convergence->moi),
                     show(r.convergence->com));
  }
  return s;
}

std::vector<std::string> check_criteria(const MetricReport& r, const Criteria& c) {
  std::vector<std::string> out;
  if (c.max_position_rmse && !(r.position_rmse <= *c.max_position_rmse)) {
    out.push_back(fmt::format("position rmse {:.6g} m > {:.6g} m", r.position_rmse, *c.max_position_rmse));
  }
  if (c.max_attitude_rmse_deg && !(r.attitude_rmse_deg <= *c.max_attitude_rmse_deg)) {
    out.push_back(fmt::format("attitude rmse {:.6g} deg > {:.6g} deg", r.attitude_rmse_deg,
                              *c.max_attitude_rmse_deg));
  }
  if (c.max_mass_error_pct) {
    if (!r.final_mass_error_pct) {
      out.push_back("mass error gate set but the run carries no object");
    } else if (!(std::abs(*r.final_mass_error_pct) <= *c.max_mass_error_pct)) {
      out.push_back(fmt::format("final mass error {:.4g} % exceeds {:.4g} %", *r.final_mass_error_pct,
                                *c.max_mass_error_pct));
    }
  }
  if (c.max_convergence_s) {
    if (!r.convergence) {
      out.push_back("convergence gate set but the run has no grasp latch");
    } else {
      const auto& cv = *r.convergence;
      for (const auto& [name, v] : {std::pair{"mass", cv.mass}, {"inertia", cv.moi}, {"com", cv.com}}) {
        if (!v || *v > *c.max_convergence_s) {
          out.push_back(fmt::format("{} convergence {} > {:.3f} s", name,
                                    v ? fmt::format("{:.3f} s", *v) : "never", *c.max_convergence_s));
        }
      }
    }
  }
  return out;
}

std::vector<ComparisonRow> compare_runs(const RunLog& a, const RunLog& b, const MetricWindow& window) {
  if (a.rows() != b.rows() || a.columns() != b.columns()) {
    throw Error(ErrorCode::MismatchedRuns, "logs differ in length or columns");
  }
  for (const char* col : {"t", "x_des", "y_des", "z_des"}) {
    if (a.series(col) != b.series(col)) {
      throw Error(ErrorCode::MismatchedRuns, fmt::format("logs differ in '{}'", col));
    }
  }
  const MetricReport ra = compute_metrics(a, window);
  const MetricReport rb = compute_metrics(b, window);
  const auto pct = [](double x, double y) {
    if (x == y) return 0.0;
    return x == 0.0 ? std::copysign(INFINITY, y - x) : 100.0 * (y - x) / x;
  };
  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < ra.channels.size(); ++i) {
    const auto& ca = ra.channels[i];
    const auto& cb = rb.channels[i];
    rows.push_back({ca.name, ca.rmse, cb.rmse, pct(ca.rmse, cb.rmse), ca.max_abs, cb.max_abs,
                    pct(ca.max_abs, cb.max_abs)});
  }
  rows.push_back({"position", ra.position_rmse, rb.position_rmse,
                  pct(ra.position_rmse, rb.position_rmse), ra.position_max, rb.position_max,
                  pct(ra.position_max, rb.position_max)});
  rows.push_back({"attitude", ra.attitude_rmse_deg, rb.attitude_rmse_deg,
                  pct(ra.attitude_rmse_deg, rb.attitude_rmse_deg), ra.attitude_max_deg,
                  rb.attitude_max_deg, pct(ra.attitude_max_deg, rb.attitude_max_deg)});
  return rows;
}

std::string format_delta(double pct) {
  if (pct == 0.0) return "(0.0%)";
  return fmt::format("({}{:.1f}%)", pct < 0.0 ? "↓" : "↑", std::abs(pct));
}

std::string format_comparison(const std::vector<ComparisonRow>& rows, const std::string& label_a,
                              const std::string& label_b) {
  std::string s = fmt::format("{:<10} {:>12} {:>12} {:>10}   {:>12} {:>12} {:>10}\n", "channel",
                              label_a + " rmse", label_b + " rmse", "", label_a + " max",
                              label_b + " max", "");
  for (const auto& r : rows) {
    s += fmt::format("{:<10} {:>12.5g} {:>12.5g} {:>10}   {:>12.5g} {:>12.5g} {:>10}\n", r.channel,
                     r.rmse_a, r.rmse_b, format_delta(r.rmse_delta_pct), r.max_a, r.max_b,
                     format_delta(r.max_delta_pct));
  }
  return s;
}

std::string format_ablation(const std::vector<AblationEntry>& entries) {
  std::vector<std::string> groups;
  for (const auto& e : entries) {
    if (std::find(groups.begin(), groups.end(), e.group) == groups.end()) groups.push_back(e.group);
  }
  std::string s;
  for (const auto& g : groups) {
    s += fmt::format("[{}]\n{:<12} {:>14} {:>14} {:>16} {:>16}\n", g, "method", "pos rmse (m)",
                     "pos max (m)", "att rmse (deg)", "att max (deg)");
    for (const auto& e : entries) {
      if (e.group != g) continue;
      s += fmt::format("{:<12} {:>14.5f} {:>14.5f} {:>16.4f} {:>16.4f}\n", e.method,
                       e.report.position_rmse, e.report.position_max, e.report.attitude_rmse_deg,
                       e.report.attitude_max_deg);
    }
  }
  return s;
}

std::vector<AblationEntry> run_ablation(const ScenarioConfig& base, std::vector<RunResult>* runs) {
  const std::vector<std::pair<std::string, Mode>> methods = {{"Pre+DOBm", Mode::IagsDob},
                                                             {"Pre only", Mode::PreOnly},
                                                             {"DOBm only", Mode::DobOnly},
                                                             {"Baseline", Mode::Baseline}};
  const std::vector<std::pair<std::string, bool>> groups = {{"feedforward", false},
                                                           {"dob-compensated", true}};
  std::vector<ScenarioConfig> cfgs;
  for (const auto& [gname, comp] : groups) {
    for (const auto& [mname, mode] : methods) {
      ScenarioConfig c = base;
      c.mode = mode;
      c.dob_compensation = comp;
      cfgs.push_back(c);
    }
  }
  auto results = run_batch(cfgs);
  std::vector<AblationEntry> entries;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& log = results[i].log;
    MetricWindow w;
    if (const auto* latch = log.find_event("grasp_latch")) w.t0 = latch->t;
    entries.push_back({methods[i % methods.size()].first, groups[i / methods.size()].first,
                       compute_metrics(log, w)});
  }
  if (runs) *runs = std::move(results);
  return entries;
}

}  // namespace ami
