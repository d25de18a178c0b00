// amsim: scenario runner and analysis front end.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ami/error.hpp"
#include "ami/freqdom.hpp"
#include "ami/margin_config.hpp"
#include "ami/metrics.hpp"
#include "ami/presense.hpp"
#include "ami/scenario.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kDivergence = 2, kCriteria = 3 };

int exit_for(const ami::Error& e) {
  switch (e.code()) {
    case ami::ErrorCode::NonFinite: return kDivergence;
    case ami::ErrorCode::NeverConverged: return kCriteria;
    default: return kConfig;
  }
}

ami::MetricWindow window_from(const std::vector<double>& w, const ami::MetricWindow& fallback) {
  if (w.empty()) return fallback;
  return {w.at(0), w.at(1)};
}

std::string log_path(const std::string& out_dir, const ami::ScenarioConfig& cfg) {
  std::string mode(ami::to_string(cfg.mode));
  for (char& c : mode) {
    if (c == '+') c = '_';
  }
  return (std::filesystem::path(out_dir) / fmt::format("{}_{}.csv", cfg.name, mode)).string();
}

int report_criteria(const ami::MetricReport& r, const ami::Criteria& c) {
  const auto bad = ami::check_criteria(r, c);
  for (const auto& b : bad) fmt::print("criteria: FAIL {}\n", b);
  return bad.empty() ? kOk : kCriteria;
}

int cmd_run(const std::string& cfg_path, const std::string& mode, long long seed,
            const std::string& out_dir, int log_every) {
  ami::ScenarioConfig cfg = ami::load_config(cfg_path);
  if (!mode.empty()) cfg.mode = ami::parse_mode(mode);
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (log_every > 0) cfg.log_every = log_every;
  const ami::RunResult res = ami::run_scenario(cfg);
  const std::string path = log_path(out_dir, cfg);
  res.log.write(path);
  fmt::print("{} [{}] seed {} -> {}\n", cfg.name, ami::to_string(cfg.mode), cfg.seed, path);
  fmt::print("controller ticks {}, observer ticks {}, servo ticks {}\n", res.control_ticks,
             res.dob_ticks, res.servo_ticks);
  for (const auto& e : res.log.events()) fmt::print("event {:.4f} s {} {:.6g}\n", e.t, e.name, e.value);
  const ami::MetricReport r = ami::compute_metrics(res.log, cfg.window);
  fmt::print("{}", ami::format_report(r));
  return report_criteria(r, cfg.criteria);
}

int cmd_metrics(const std::string& log_file, const std::string& truth, const std::vector<double>& w) {
  const ami::RunLog log = ami::RunLog::read(log_file);
  ami::MetricWindow window;
  ami::Criteria criteria;
  if (!truth.empty()) {
    const ami::ScenarioConfig cfg = ami::load_config(truth);
    window = cfg.window;
    criteria = cfg.criteria;
  }
  const ami::MetricReport r = ami::compute_metrics(log, window_from(w, window));
  fmt::print("{}", ami::format_report(r));
  return report_criteria(r, criteria);
}

int cmd_compare(const std::string& a, const std::string& b, const std::vector<double>& w) {
  const auto rows = ami::compare_runs(ami::RunLog::read(a), ami::RunLog::read(b), window_from(w, {}));
  fmt::print("{}", ami::format_comparison(rows, "A", "B"));
  return kOk;
}

void print_margins(const ami::MarginReport& m) {
  fmt::print("  PM {:8.3f} deg at {:9.4f} rad/s   GM {} at {}\n", m.phase_margin_deg, m.gain_crossover,
             std::isinf(m.gain_margin_db) ? std::string("inf") : fmt::format("{:.3f} dB", m.gain_margin_db),
             std::isnan(m.phase_crossover) ? std::string("-") : fmt::format("{:.4f} rad/s", m.phase_crossover));
}

int cmd_margins(const std::string& config, double kk, double js) {
  const ami::MarginConfig c = config.empty() ? ami::MarginConfig{} : ami::load_margin_config(config);
  for (int axis = 0; axis < 3; ++axis) {
    const auto tf = ami::open_loop_tf_scaled(c.model.axis(axis), kk, js, c.model.k_m, c.model.tau_m,
                                             c.model.j_nominal(axis));
    fmt::print("axis {} (k_k scale {}, J scale {}):\n", "xyz"[axis], kk, js);
    print_margins(ami::margins(tf, c.band));
  }
  return kOk;
}

int cmd_sweep_uncertainty(const std::string& config, int grid, bool serial) {
  ami::MarginConfig c = config.empty() ? ami::MarginConfig{} : ami::load_margin_config(config);
  if (grid > 0) c.grid_n = grid;
  const ami::SweepResult r = serial ? ami::robustness_sweep_serial(c.model, c.box, c.grid_n, c.band)
                                    : ami::robustness_sweep(c.model, c.box, c.grid_n, c.band);
  fmt::print("axis,j_scale,kk_scale,gain_margin_db,phase_margin_deg,gain_crossover,phase_crossover\n");
  for (const auto& cell : r.table) {
    fmt::print("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", "xyz"[cell.axis], cell.j_scale,
               cell.kk_scale, cell.margins.gain_margin_db, cell.margins.phase_margin_deg,
               cell.margins.gain_crossover, cell.margins.phase_crossover);
  }
  fmt::print(stderr, "worst phase margin {:.3f} deg at {:.3f} rad/s (axis {}, J x{:.3f}, k_k x{:.3f})\n",
             r.worst.margins.phase_margin_deg, r.worst.margins.gain_crossover, "xyz"[r.worst.axis],
             r.worst.j_scale, r.worst.kk_scale);
  return kOk;
}

int cmd_sweep_workspace(double mass, const std::vector<double>& dims, int grid, bool serial) {
  ami::WorkspacePayload p;
  p.mass = mass;
  if (!dims.empty()) p.dims = ami::Vec3(dims.at(0), dims.at(1), dims.at(2));
  const ami::VehicleConfig v;
  const auto r = serial ? ami::workspace_kk_sweep_serial({}, p, v.params(), grid)
                        : ami::workspace_kk_sweep({}, p, v.params(), grid);
  fmt::print("axis,max_kk,theta_1_deg,theta_2_deg,theta_3_deg\n");
  for (int a = 0; a < 3; ++a) {
    const auto& th = r.argmax_theta[a];
    fmt::print("{},{:.6f},{:.2f},{:.2f},{:.2f}\n", "xyz"[a], r.max_kk(a), th(0) * 180.0 / ami::kPi,
               th(1) * 180.0 / ami::kPi, th(2) * 180.0 / ami::kPi);
  }
  fmt::print(stderr, "{} reachable poses\n", r.poses_evaluated);
  return kOk;
}

int cmd_estimate(const std::string& cloud_file, const std::string& label, const std::string& catalog,
                 double pad) {
  const auto cloud = ami::read_cloud(cloud_file);
  const auto box = ami::fit_obb(cloud);
  const auto prior = ami::PriorCatalog::load(catalog).prior_for(label);
  const auto est = ami::estimate_inertia(box, prior, pad);
  fmt::print("points        {}\n", cloud.points.size());
  fmt::print("box dims      {:.4f} {:.4f} {:.4f} m\n", box.dims(0), box.dims(1), box.dims(2));
  fmt::print("box centre    {:.4f} {:.4f} {:.4f} m\n", box.center(0), box.center(1), box.center(2));
  fmt::print("volume        {:.6g} m^3 (box {:.6g})\n", est.volume_hat, est.volume_box);
  fmt::print("mass          {:.5f} kg\n", est.mass_tilde);
  const ami::Mat3 j = est.moi_tilde;
  fmt::print("inertia diag  {:.6e} {:.6e} {:.6e} kg m^2 (box axes)\n", j(0, 0), j(1, 1), j(2, 2));
  fmt::print("grasp offset  {:.4f} {:.4f} {:.4f} m\n", est.grasp_offset(0), est.grasp_offset(1),
             est.grasp_offset(2));
  return kOk;
}

int cmd_ablation(const std::string& cfg_path, long long seed, const std::string& out_dir) {
  ami::ScenarioConfig base = ami::load_config(cfg_path);
  if (seed >= 0) base.seed = static_cast<std::uint64_t>(seed);
  std::vector<ami::RunResult> runs;
  const auto entries = ami::run_ablation(base, &runs);
  if (!out_dir.empty()) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const std::string name = fmt::format("{}_ablation_{}.csv", base.name, i);
      runs[i].log.write((std::filesystem::path(out_dir) / name).string());
    }
  }
  fmt::print("{}", ami::format_ablation(entries));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aerial manipulator simulation and analysis"};
  app.require_subcommand(1);

  std::string cfg_path, mode, out_dir = "out", truth, log_a, log_b, config, cloud, label;
  std::string catalog = "data/priors.csv";
  long long seed = -1;
  int log_every = 0, grid = 0;
  double kk = 1.0, js = 1.0, mass = 0.4, pad = 0.01;
  std::vector<double> window, dims;
  bool workspace = false, uncertainty = false, serial = false;

  auto* run = app.add_subcommand("run", "Run a scenario and write its log");
  run->add_option("scenario", cfg_path, "Scenario YAML")->required()->check(CLI::ExistingFile);
  run->add_option("--mode", mode, "baseline | iags | iags+dob | pre-only | dob-only");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--log-every", log_every, "Log every N sim steps");

  auto* metrics = app.add_subcommand("metrics", "Metrics of a run log");
  metrics->add_option("log", log_a, "Run log CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("--truth", truth, "Scenario YAML supplying the window and criteria");
  metrics->add_option("--window", window, "t0 t1")->expected(2);

  auto* compare = app.add_subcommand("compare", "Per-channel deltas of log B against log A");
  compare->add_option("a", log_a)->required()->check(CLI::ExistingFile);
  compare->add_option("b", log_b)->required()->check(CLI::ExistingFile);
  compare->add_option("--window", window, "t0 t1")->expected(2);

  auto* margins = app.add_subcommand("margins", "Rate-loop gain and phase margins per axis");
  margins->add_option("--config", config, "Margin YAML")->check(CLI::ExistingFile);
  margins->add_option("--kk-scale", kk, "Scheduled gain scale");
  margins->add_option("--j-scale", js, "Inertia scale");

  auto* sweep = app.add_subcommand("sweep", "Robustness or workspace sweep");
  auto* sw_group = sweep->add_option_group("kind");
  sw_group->add_flag("--uncertainty", uncertainty, "Margins over the uncertainty box");
  sw_group->add_flag("--workspace", workspace, "Scheduled-gain maxima over the arm workspace");
  sw_group->require_option(1);
  sweep->add_option("--config", config, "Margin YAML (uncertainty sweep)")->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid, "Grid points per dimension");
  sweep->add_option("--mass", mass, "Payload mass (workspace sweep)");
  sweep->add_option("--dims", dims, "Payload box dims (workspace sweep)")->expected(3);
  sweep->add_flag("--serial", serial, "Use the serial reference kernel");

  auto* estimate = app.add_subcommand("estimate", "Pre-sense a payload from a point cloud");
  estimate->add_option("--cloud", cloud, "xyz file")->required()->check(CLI::ExistingFile);
  estimate->add_option("--label", label, "Object class")->required();
  estimate->add_option("--catalog", catalog, "Prior catalog CSV");
  estimate->add_option("--pad", pad, "Suction pad height (m)");

  auto* ablation = app.add_subcommand("ablation", "Method x group ablation on a grasp scenario");
  ablation->add_option("scenario", cfg_path)->required()->check(CLI::ExistingFile);
  ablation->add_option("--seed", seed, "Override the scenario seed");
  ablation->add_option("--out", out_dir, "Write the eight logs here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(cfg_path, mode, seed, out_dir, log_every);
    if (*metrics) return cmd_metrics(log_a, truth, window);
    if (*compare) return cmd_compare(log_a, log_b, window);
    if (*margins) return cmd_margins(config, kk, js);
    if (*sweep) {
      return uncertainty ? cmd_sweep_uncertainty(config, grid, serial)
                         : cmd_sweep_workspace(mass, dims, grid > 0 ? grid : 25, serial);
    }
    if (*estimate) return cmd_estimate(cloud, label, catalog, pad);
    if (*ablation) return cmd_ablation(cfg_path, seed, ablation->count("--out") ? out_dir : "");
  } catch (const ami::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_for(e);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfig;
  }
  return kOk;
}
