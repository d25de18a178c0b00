#pragma once

#include <filesystem>
#include <string>

#include "ami/freqdom.hpp"

namespace ami {

/// Rate-loop analysis settings. Every key is optional; defaults are the
/// shipped vehicle and gains.
///
///   rate_gains:  {kp: [x, y, z], ki: [...], kd: [...]}
///   motor:       {K_m: 1.0, tau_m: 0.02}
///   inertia_diag: [jx, jy, jz]
///   band:        {lo: 1.0, hi: 600.0, points: 4000}
///   uncertainty: {j_hi: [...], kk_hi: [...], grid: 9}
struct MarginConfig {
  RateLoopModel model;
  Band band;
  UncertaintyBox box;
  int grid_n = 9;
};

MarginConfig parse_margin_config(const std::string& yaml);
MarginConfig load_margin_config(const std::filesystem::path& path);

}  // namespace ami
