#include "sonarcursor/syseval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "sonarcursor/errors.hpp"
#include "sonarcursor/parallel.hpp"

namespace sonar {

namespace {

double window_mean(const std::vector<CursorState>& track, double t0, double t1) {
  double sum = 0.0;
  int n = 0;
  for (const auto& cs : track)
    if (cs.time_s >= t0 && cs.time_s <= t1) {
      sum += cs.position_mm;
      ++n;
    }
  if (n == 0) throw ContractViolation("system eval: empty rest window");
  return sum / n;
}

}  // namespace

SysEvalResult run_system_eval(const StageProtocolConfig& cfg, const SonarConfig& sonar,
                              const TrackerConfig& tracker, int threads) {
  const auto trials = linear_stage_protocol(cfg);
  SysEvalResult result;
  result.trials.resize(trials.size());

  parallel_for_index(trials.size(), threads, [&](std::size_t i) {
    const StageTrial& st = trials[i];
    const EchoSim sim = synthesize_echo(st.scene, sonar);
    TrackerConfig tcfg = tracker;
    tcfg.sonar = sonar;
    Tracker trk(tcfg);
    std::vector<CursorState> track;
    const int flen = sonar.frame_len;
    for (std::size_t off = 0; off + flen <= sim.audio.size(); off += flen) {
      AudioFrame f;
      f.samples.assign(sim.audio.begin() + off, sim.audio.begin() + off + flen);
      f.start_time = static_cast<double>(off) / sonar.sample_rate;
      track.push_back(trk.process(f));
    }
    const double duration = st.scene.duration_s > 0.0
                                ? st.scene.duration_s
                                : st.scene.finger->trajectory.duration();
    const double rest0 = window_mean(track, 0.3, cfg.hold_s - 0.05);
    const double rest1 = window_mean(track, duration - 0.6, duration - 0.02);

    SysEvalTrial& out = result.trials[i];
    out.range_lo_mm = st.range_lo_mm;
    out.speed_mm_s = st.speed_mm_s;
    out.noise_on = st.noise_on;
    out.rep = st.rep;
    out.downward = st.downward;
    out.truth_mm = st.downward ? -cfg.move_mm : cfg.move_mm;
    out.measured_mm = rest1 - rest0;
    out.abs_err_mm = std::abs(out.measured_mm - out.truth_mm);
  });

  std::map<std::tuple<double, double, bool>, std::vector<double>> cells;
  for (const auto& tr : result.trials)
    cells[{tr.range_lo_mm, tr.speed_mm_s, tr.noise_on}].push_back(tr.abs_err_mm);
  for (const auto& [key, errs] : cells) {
    SysEvalCell cell;
    cell.range_lo_mm = std::get<0>(key);
    cell.speed_mm_s = std::get<1>(key);
    cell.noise_on = std::get<2>(key);
    cell.n = static_cast<int>(errs.size());
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= errs.size();
    double ss = 0.0;
    for (double e : errs) ss += (e - mean) * (e - mean);
    cell.mean_err_mm = mean;
    cell.sd_err_mm = errs.size() > 1 ? std::sqrt(ss / (errs.size() - 1)) : 0.0;
    result.cells.push_back(cell);
  }
  return result;
}

}  // namespace sonar
