#pragma once

// agent - scripted reference user driving the selection methods over the
// task protocols, either against an ideal cursor (bypass) or through the
// full audio/IMU pipeline. The agent is a calibration instrument with frozen
// parameters, not a human model; downstream checks assert orderings and
// curve shapes, not absolute human-scale numbers.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sonarcursor/fitts.hpp"
#include "sonarcursor/simulate.hpp"
#include "sonarcursor/tracking.hpp"
#include "sonarcursor/triggers.hpp"

namespace sonar {

struct AgentParams {
  double reaction_time_s = 0.12;    // pause between a selection and the next move
  double fixation_s = 0.6;          // initial settling hold
  double peak_speed_mm_s = 240.0;
  double move_a_s = 0.12;           // movement duration intercept
  double move_b_s_per_bit = 0.33;   // movement duration slope over ID
  double move_jitter = 0.12;        // lognormal sigma on durations
  double endpoint_sd_fraction = 0.16;  // aim scatter, fraction of W
  double overshoot_prob = 0.05;
  double overshoot_mm = 2.5;
  double hesitation_prob = 0.22;    // brief bounce just inside a transit target
  double hesitation_in_mm = 1.2;
  double hesitation_out_mm = 2.2;

  // double-crossing
  double dc_depth_frac = 0.45;      // reversal depth into the target
  double dc_exit_mm = 4.0;          // exit distance back past the entry edge
  double dc_reverse_s = 0.22;

  // dwell
  double dwell_hold_s = 0.62;       // planned hold; must exceed the machine's timer

  // pinch
  double pinch_main_sd_mm = 2.2;    // ballistic landing scatter
  double pinch_homing_frac = 0.30;  // corrections continue until inside this * W
  double pinch_correction_s = 0.22;
  double pinch_pause_s = 0.35;      // verification pause before each correction
  // Careful grips: verify on target, then close. The settle floor keeps their
  // contact margin past any rewind offset in play, so a temporal offset never
  // samples a careful grip before target entry.
  double pinch_settle_mean_s = 0.22;
  double pinch_settle_sd_s = 0.04;
  double pinch_settle_min_s = 0.16;
  // Rushed grips: the grip starts closing during the approach, backdating the
  // contact instant; the hand is no longer sliding when the grip seats.
  double pinch_rush_prob = 0.18;
  double pinch_rush_settle_mean_s = -0.09;
  double pinch_rush_settle_sd_s = 0.09;
  double pinch_rush_settle_min_s = -0.35;
  double pinch_close_s = 0.035;     // grip-closing window (the slide happens here)
  double trigger_latency_s = 0.012; // grip contact -> detection
  double pinch_kick_mean_mm = 0.43; // slide during closing (careful grips)
  double pinch_kick_sd_mm = 1.0;
};

struct AttemptPlan {
  double t_begin = 0.0;     // when the movement for this attempt starts
  double t_complete = 0.0;  // planned selection instant
};

struct TrialPlan {
  Trajectory screen;        // displacement relative to start_mm
  double start_mm = 0.0;
  std::vector<double> pinch_impact_times;  // grip-contact instants
  std::vector<AttemptPlan> attempts;
  double duration_s = 0.0;

  double position(double t) const { return start_mm + screen.position(t); }
};

TrialPlan plan_trial(const TaskSpec& spec, Method method, const AgentParams& params,
                     std::mt19937_64& rng);

struct RunConfig {
  Method method = Method::kDoubleCrossing;
  bool haptics = false;
  double pinch_offset_ms = 0.0;
  AgentParams agent;
  bool full_pipeline = false;  // synthesize audio/IMU and track, vs ideal cursor
  double screen_origin_range_mm = 35.0;  // finger range at screen coordinate 0
  double grace_s = 1.0;        // slack past the planned completion before "missing"
  SonarConfig sonar;
  TrackerConfig tracker;
  SceneConfig scene_base;      // statics / noise / walker for full_pipeline
  ImuConfig imu_base;          // noise floor for full_pipeline
  PinchDetectorConfig detector;
};

struct TrialRun {
  TrialRecord record;
  std::vector<TriggerEvent> events;
  std::vector<CursorState> cursor;
  std::vector<double> pinch_detections;
  TrialPlan plan;
};

TrialRun run_trial(const TaskSpec& spec, const RunConfig& cfg, std::uint64_t seed);

// Independent trials; per-trial seeds derived from `seed` and the trial index.
std::vector<TrialRecord> run_protocol(std::span<const TaskSpec> specs, const RunConfig& cfg,
                                      std::uint64_t seed, int threads = 1);

// --- pinch temporal-offset sweep -------------------------------------------

struct OffsetSweepPoint {
  double offset_ms = 0.0;
  double er_pct = 0.0;
  double corrected_pp = 0.0;  // error at offset 0, success here (% of selections)
  double premature_pp = 0.0;  // success at offset 0, error here (% of selections)
};

struct OffsetSweepResult {
  std::vector<OffsetSweepPoint> points;  // offsets ascending, first is 0
  double baseline_er_pct = 0.0;
  // First offset interval [lo, hi] where premature overtakes corrected.
  double crossover_lo_ms = 0.0, crossover_hi_ms = 0.0;
  bool has_crossover = false;
};

// Re-runs identical pinch trials at each offset; plans and detection times are
// seed-determined, so per-selection outcomes align across offsets.
OffsetSweepResult run_offset_sweep(std::span<const TaskSpec> specs, const RunConfig& cfg,
                                   std::uint64_t seed, std::span<const double> offsets_ms,
                                   int threads = 1);

}  // namespace sonar
