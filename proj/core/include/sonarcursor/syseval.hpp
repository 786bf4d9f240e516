#pragma once

// syseval - linear-stage style displacement accuracy evaluation: every
// protocol trial is synthesized, tracked, and scored as the error between the
// tracked displacement (rest-to-rest) and the staged movement.

#include <vector>

#include "sonarcursor/simulate.hpp"
#include "sonarcursor/tracking.hpp"

namespace sonar {

struct SysEvalTrial {
  double range_lo_mm = 0.0;
  double speed_mm_s = 0.0;
  bool noise_on = false;
  int rep = 0;
  bool downward = false;
  double truth_mm = 0.0;     // signed staged displacement
  double measured_mm = 0.0;  // tracked displacement, rest-tail means
  double abs_err_mm = 0.0;
};

struct SysEvalCell {
  double range_lo_mm = 0.0;
  double speed_mm_s = 0.0;
  bool noise_on = false;
  int n = 0;
  double mean_err_mm = 0.0;
  double sd_err_mm = 0.0;
};

struct SysEvalResult {
  std::vector<SysEvalTrial> trials;  // protocol order
  std::vector<SysEvalCell> cells;    // range x speed x noise, sorted
};

SysEvalResult run_system_eval(const StageProtocolConfig& cfg, const SonarConfig& sonar,
                              const TrackerConfig& tracker, int threads = 1);

}  // namespace sonar
