#include "sonarcursor/agent.hpp"

#include <algorithm>
#include <cmath>

#include "sonarcursor/errors.hpp"
#include "sonarcursor/parallel.hpp"

namespace sonar {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

const Target& target_by_id(const TaskSpec& spec, int id) {
  for (const auto& t : spec.targets)
    if (t.id == id) return t;
  throw ConfigError("task sequence names an unknown target id");
}

// Builds the trial trajectory with a running clock and absolute position.
struct PlanBuilder {
  const AgentParams& p;
  std::mt19937_64& rng;
  Trajectory traj;
  double t = 0.0;
  double pos = 0.0;

  double gauss(double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(rng);
  }
  double logn(double sigma) { return std::exp(gauss(0.0, sigma)); }
  bool chance(double prob) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < prob;
  }
  void hold(double d) {
    if (d > 1e-9) {
      traj.hold(d);
      t += d;
    }
  }
  void move(double d, double target_x) {
    d = std::max(d, 0.02);
    traj.min_jerk(d, target_x - pos);
    t += d;
    pos = target_x;
  }
  // Travel toward `to`, bouncing briefly inside transit targets on occasion.
  void travel(const TaskSpec& spec, int goal_id, double dur, double to) {
    const double from = pos;
    const double total = std::abs(to - from);
    if (total < 1e-9) return;
    const double dir = to > from ? 1.0 : -1.0;
    std::vector<const Target*> transits;
    for (const auto& tr : spec.targets) {
      if (tr.id == goal_id) continue;
      const double lo = std::min(from, to), hi = std::max(from, to);
      if (tr.left() > lo && tr.right() < hi) transits.push_back(&tr);
    }
    std::sort(transits.begin(), transits.end(), [&](const Target* a, const Target* b) {
      return std::abs(a->center_mm - from) < std::abs(b->center_mm - from);
    });
    auto leg = [&](double x) {
      const double d = std::max(0.12, dur * std::abs(x - pos) / total);
      move(d, x);
    };
    for (const Target* tr : transits) {
      if (!chance(p.hesitation_prob)) continue;
      const double near_edge = dir > 0 ? tr->left() : tr->right();
      leg(near_edge + dir * p.hesitation_in_mm);
      move(0.12, near_edge - dir * p.hesitation_out_mm);
    }
    leg(to);
  }
};

constexpr double kDwellMachineS = 0.5;  // matches DwellTrigger's default timer

}  // namespace

TrialPlan plan_trial(const TaskSpec& spec, Method method, const AgentParams& params,
                     std::mt19937_64& rng) {
  validate_targets(spec.targets);
  TrialPlan plan;
  plan.start_mm = spec.start_mm;
  PlanBuilder b{params, rng};
  b.pos = spec.start_mm;
  b.hold(params.fixation_s);
  double last_impact = -1.0;

  for (int goal_id : spec.sequence) {
    const Target& goal = target_by_id(spec, goal_id);
    AttemptPlan ap;
    ap.t_begin = b.t;
    const double W = goal.width_mm;
    const double A = std::abs(goal.center_mm - b.pos);
    const double dir = goal.center_mm >= b.pos ? 1.0 : -1.0;
    const double id_bits = std::log2(A / W + 1.0);
    double dur = (params.move_a_s + params.move_b_s_per_bit * id_bits) * b.logn(params.move_jitter);
    dur = std::max({dur, 1.875 * A / params.peak_speed_mm_s, 0.12});
    const double sd_w = params.endpoint_sd_fraction * W;

    switch (method) {
      case Method::kDoubleCrossing: {
        const double entry = dir > 0 ? goal.left() : goal.right();
        double aim = entry + dir * (params.dc_depth_frac * W) + b.gauss(0.0, sd_w);
        aim = std::clamp(aim, goal.left() + 0.12 * W, goal.right() - 0.12 * W);
        double exit_x;
        if (!goal.contains(b.pos) && A > W && b.chance(params.overshoot_prob)) {
          const double far_edge = dir > 0 ? goal.right() : goal.left();
          b.travel(spec, goal_id, dur, far_edge + dir * params.overshoot_mm);
          b.move(std::max(0.18, 1.875 * std::abs(aim - b.pos) / params.peak_speed_mm_s), aim);
          exit_x = far_edge + dir * params.dc_exit_mm;  // back out the comeback edge
        } else {
          b.travel(spec, goal_id, dur, aim);
          exit_x = entry - dir * params.dc_exit_mm;
        }
        ap.t_complete = b.t;  // selection fires at the reversal vertex
        const double rev =
            std::max(params.dc_reverse_s, 1.875 * std::abs(exit_x - b.pos) / params.peak_speed_mm_s);
        b.move(rev * b.logn(0.1), exit_x);
        break;
      }
      case Method::kDwell: {
        double aim = goal.center_mm + b.gauss(0.0, sd_w);
        aim = std::clamp(aim, goal.left() + 0.1 * W, goal.right() - 0.1 * W);
        if (std::abs(aim - b.pos) > 0.05) {
          if (!goal.contains(b.pos) && A > W && b.chance(params.overshoot_prob)) {
            const double far_edge = dir > 0 ? goal.right() : goal.left();
            b.travel(spec, goal_id, dur, far_edge + dir * params.overshoot_mm);
            b.move(std::max(0.18, 1.875 * std::abs(aim - b.pos) / params.peak_speed_mm_s), aim);
          } else {
            b.travel(spec, goal_id, dur, aim);
          }
        }
        ap.t_complete = b.t + kDwellMachineS;
        b.hold(params.dwell_hold_s);
        break;
      }
      case Method::kPinch: {
        const double aim = goal.center_mm + b.gauss(0.0, sd_w);
        b.travel(spec, goal_id, dur, aim + b.gauss(0.0, params.pinch_main_sd_mm));
        int guard = 0;
        while (std::abs(b.pos - goal.center_mm) > params.pinch_homing_frac * W && guard < 3) {
          b.hold(params.pinch_pause_s * b.logn(0.25));
          const double land = aim + b.gauss(0.0, 0.3 + 0.25 * std::abs(b.pos - aim));
          b.move(params.pinch_correction_s * b.logn(0.2), land);
          ++guard;
        }
        const bool rushed = b.chance(params.pinch_rush_prob);
        const double settle =
            rushed ? std::clamp(b.gauss(params.pinch_rush_settle_mean_s,
                                        params.pinch_rush_settle_sd_s),
                                params.pinch_rush_settle_min_s, 0.6)
                   : std::clamp(b.gauss(params.pinch_settle_mean_s, params.pinch_settle_sd_s),
                                params.pinch_settle_min_s, 0.6);
        if (settle > 0.0) b.hold(settle);
        const double kick_draw = b.gauss(params.pinch_kick_mean_mm, params.pinch_kick_sd_mm);
        const double kick = rushed ? 0.0 : kick_draw;
        b.move(params.pinch_close_s, b.pos + kick);
        // An anticipatory grip (negative settle) backdates the contact instant.
        double impact = b.t + std::min(settle, 0.0);
        impact = std::max({impact, ap.t_begin + 0.05, last_impact + 0.25});
        plan.pinch_impact_times.push_back(impact);
        last_impact = impact;
        ap.t_complete = impact + params.trigger_latency_s;
        b.hold(std::max(0.05, ap.t_complete - b.t + 0.03));
        break;
      }
    }
    b.hold(params.reaction_time_s);
    plan.attempts.push_back(ap);
  }
  b.hold(0.4);
  plan.duration_s = b.t;
  plan.screen = std::move(b.traj);
  return plan;
}

TrialRun run_trial(const TaskSpec& spec, const RunConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0xA6E17));
  TrialRun out;
  out.plan = plan_trial(spec, cfg.method, cfg.agent, rng);
  const TrialPlan& plan = out.plan;
  const double horizon = plan.duration_s + cfg.grace_s + 0.5;

  if (cfg.full_pipeline) {
    SceneConfig scene = cfg.scene_base;
    FingerConfig finger;
    if (scene.finger) finger = *scene.finger;
    finger.start_range_mm = cfg.screen_origin_range_mm + plan.start_mm;
    finger.trajectory = plan.screen;
    scene.finger = finger;
    scene.duration_s = horizon;
    scene.seed = mix_seed(seed, 0xEC40);
    const EchoSim sim = synthesize_echo(scene, cfg.sonar);
    TrackerConfig tcfg = cfg.tracker;
    tcfg.sonar = cfg.sonar;
    Tracker tracker(tcfg);
    const int flen = cfg.sonar.frame_len;
    const double fs = cfg.sonar.sample_rate;
    for (std::size_t i = 0; i + flen <= sim.audio.size(); i += flen) {
      AudioFrame f;
      f.samples.assign(sim.audio.begin() + i, sim.audio.begin() + i + flen);
      f.start_time = static_cast<double>(i) / fs;
      CursorState cs = tracker.process(f);
      if (cs.time_s <= 0.0 && out.cursor.empty() && cs.position_mm == 0.0 && cs.quality == 0.0)
        continue;  // no baseband output yet
      cs.position_mm += plan.start_mm;  // tracker reports displacement from rest
      out.cursor.push_back(cs);
    }
  } else {
    const double dt = cfg.sonar.frame_dt();
    const int n = static_cast<int>(std::ceil(horizon / dt));
    double prev = plan.position(0.0);
    for (int k = 1; k <= n; ++k) {
      const double t = k * dt;
      CursorState cs;
      cs.time_s = t;
      cs.position_mm = plan.position(t);
      cs.velocity_mm_s = (cs.position_mm - prev) / dt;
      cs.quality = 1.0;
      prev = cs.position_mm;
      out.cursor.push_back(cs);
    }
  }

  if (cfg.method == Method::kPinch) {
    if (cfg.full_pipeline) {
      ImuConfig imu = cfg.imu_base;
      imu.duration_s = horizon;
      imu.pinch_times = plan.pinch_impact_times;
      imu.seed = mix_seed(seed, 0x1D1D);
      const ImuStream stream = synthesize_imu(imu);
      PinchDetector detector(cfg.detector);
      out.pinch_detections = detector.detect(stream);
    } else {
      for (double ti : plan.pinch_impact_times)
        out.pinch_detections.push_back(ti + cfg.agent.trigger_latency_s);
    }
  }

  out.record.spec = spec;
  out.record.method = cfg.method;
  out.record.haptics = cfg.haptics;
  out.record.seed = seed;

  DoubleCrossingTrigger dc(spec.targets);
  DwellTrigger dwell(spec.targets);
  PinchTrigger pinch(spec.targets, cfg.pinch_offset_ms);
  HapticsConfig hcfg;
  hcfg.enabled = cfg.haptics;

  const std::size_t n_attempts = spec.sequence.size();
  std::size_t k = 0;
  std::size_t det_i = 0;
  double prev_x = spec.start_mm;
  double t_start = plan.attempts.empty() ? 0.0 : plan.attempts[0].t_begin;
  bool err_seen = false;
  double err_t = 0.0, err_x = 0.0;
  int enters = 0;

  auto finish = [&](double t_sel, double x, bool error, bool missing) {
    const Target& g = target_by_id(spec, spec.sequence[k]);
    SelectionRecord sr;
    sr.goal_id = g.id;
    sr.goal_center_mm = g.center_mm;
    sr.width_mm = spec.width_mm;
    sr.amplitude_nominal_mm = std::abs(g.center_mm - prev_x);
    sr.endpoint_mm = x;
    sr.prev_mm = prev_x;
    sr.t_start = t_start;
    sr.t_select = t_sel;
    sr.error = error;
    sr.missing = missing;
    // Every double-crossing exit terminates the engagement, so re-entries
    // cannot accumulate within an attempt.
    sr.re_entries = cfg.method == Method::kDoubleCrossing ? 0 : std::max(0, enters - 1);
    out.record.selections.push_back(sr);
    prev_x = x;
    t_start = t_sel;
    ++k;
    err_seen = false;
    enters = 0;
  };

  auto handle = [&](std::vector<TriggerEvent>&& raw) {
    const std::vector<TriggerEvent> evs = apply_haptics(raw, hcfg);
    for (const auto& e : evs) {
      out.events.push_back(e);
      if (k >= n_attempts) continue;
      const int gid = spec.sequence[k];
      switch (e.kind) {
        case EventKind::kEnter:
          if (e.target_id && *e.target_id == gid) ++enters;
          break;
        case EventKind::kSelect:
          if (cfg.method == Method::kPinch) {
            finish(e.time_s, e.coordinate_mm, false, false);
          } else if (e.target_id && *e.target_id == gid) {
            if (err_seen)
              finish(err_t, err_x, true, false);
            else
              finish(e.time_s, e.coordinate_mm, false, false);
          } else if (!err_seen) {
            err_seen = true;
            err_t = e.time_s;
            err_x = e.coordinate_mm;
          }
          break;
        case EventKind::kErrorSelect:
          if (cfg.method == Method::kPinch) {
            finish(e.time_s, e.coordinate_mm, true, false);
          } else if (!err_seen) {
            err_seen = true;
            err_t = e.time_s;
            err_x = e.coordinate_mm;
          }
          break;
        default:
          break;  // exit / cancel: engagement bookkeeping only
      }
    }
  };

  auto highlighted = [&]() -> std::optional<int> {
    if (k < n_attempts) return spec.sequence[k];
    return std::nullopt;
  };

  for (const CursorState& cs : out.cursor) {
    switch (cfg.method) {
      case Method::kDoubleCrossing:
        handle(dc.step(cs, highlighted()));
        break;
      case Method::kDwell:
        handle(dwell.step(cs, highlighted()));
        break;
      case Method::kPinch:
        handle(pinch.step(cs, highlighted()));
        while (det_i < out.pinch_detections.size() &&
               out.pinch_detections[det_i] <= cs.time_s + 1e-12) {
          handle(pinch.pinch(out.pinch_detections[det_i], highlighted()));
          ++det_i;
        }
        break;
    }
    while (k < n_attempts && cs.time_s > plan.attempts[k].t_complete + cfg.grace_s) {
      if (err_seen) {
        finish(err_t, err_x, true, false);
      } else {
        const double td = plan.attempts[k].t_complete + cfg.grace_s;
        finish(td, plan.position(td), false, true);
      }
    }
  }
  while (k < n_attempts) {
    if (err_seen) {
      finish(err_t, err_x, true, false);
    } else {
      const double td = plan.attempts[k].t_complete + cfg.grace_s;
      finish(td, plan.position(td), false, true);
    }
  }
  return out;
}

std::vector<TrialRecord> run_protocol(std::span<const TaskSpec> specs, const RunConfig& cfg,
                                      std::uint64_t seed, int threads) {
  std::vector<TrialRecord> out(specs.size());
  parallel_for_index(specs.size(), threads, [&](std::size_t i) {
    out[i] = run_trial(specs[i], cfg, mix_seed(seed, i)).record;
  });
  return out;
}

OffsetSweepResult run_offset_sweep(std::span<const TaskSpec> specs, const RunConfig& cfg,
                                   std::uint64_t seed, std::span<const double> offsets_ms,
                                   int threads) {
  if (cfg.method != Method::kPinch)
    throw ConfigError("offset sweep applies to the pinch method");
  if (offsets_ms.empty()) throw ConfigError("offset sweep needs at least one offset");
  for (std::size_t i = 1; i < offsets_ms.size(); ++i)
    if (offsets_ms[i] <= offsets_ms[i - 1])
      throw ConfigError("offsets must be strictly ascending");

  auto classify = [&](double offset) {
    RunConfig c = cfg;
    c.pinch_offset_ms = offset;
    const auto records = run_protocol(specs, c, seed, threads);
    std::vector<int> flags;  // 1 error, 0 success, -1 missing; practice skipped
    for (const auto& rec : records) {
      if (rec.spec.practice) continue;
      for (const auto& sel : rec.selections)
        flags.push_back(sel.missing ? -1 : (sel.error ? 1 : 0));
    }
    return flags;
  };

  const std::vector<int> base =
      offsets_ms[0] == 0.0 ? std::vector<int>() : classify(0.0);

  OffsetSweepResult result;
  std::vector<int> err0 = base;
  for (double offset : offsets_ms) {
    const auto flags = classify(offset);
    if (offset == 0.0) err0 = flags;
    if (err0.empty()) err0 = flags;  // offsets started above 0 and base was empty
    if (flags.size() != err0.size())
      throw ContractViolation("offset sweep selections misaligned across offsets");
    OffsetSweepPoint pt;
    pt.offset_ms = offset;
    int n = 0, errs = 0, corrected = 0, premature = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) {
      if (flags[i] < 0 || err0[i] < 0) continue;
      ++n;
      errs += flags[i];
      corrected += (err0[i] == 1 && flags[i] == 0) ? 1 : 0;
      premature += (err0[i] == 0 && flags[i] == 1) ? 1 : 0;
    }
    if (n > 0) {
      pt.er_pct = 100.0 * errs / n;
      pt.corrected_pp = 100.0 * corrected / n;
      pt.premature_pp = 100.0 * premature / n;
    }
    result.points.push_back(pt);
  }
  {
    int n = 0, errs = 0;
    for (int f : err0) {
      if (f < 0) continue;
      ++n;
      errs += f;
    }
    result.baseline_er_pct = n > 0 ? 100.0 * errs / n : 0.0;
  }
  for (std::size_t j = 1; j < result.points.size(); ++j) {
    if (result.points[j].premature_pp > result.points[j].corrected_pp) {
      result.has_crossover = true;
      result.crossover_lo_ms = result.points[j - 1].offset_ms;
      result.crossover_hi_ms = result.points[j].offset_ms;
      break;
    }
  }
  return result;
}

}  // namespace sonar
