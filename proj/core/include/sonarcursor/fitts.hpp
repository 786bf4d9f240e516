#pragma once

// fitts - serial selection task protocols and ISO-9241-9-style metrics.
// Effective difficulty: ID_e = log2(A_e/W_e + 1) with W_e = 4.133 * SD of
// signed endpoint deviations and A_e the mean actual movement amplitude.
// Throughput aggregates ID_e/MT per (W, A) condition (mean of means; a pooled
// variant is reported alongside).

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sonarcursor/triggers.hpp"

namespace sonar {

inline constexpr double kDisplayWidthMm = 37.3;

struct TaskSpec {
  int study = 1;
  double width_mm = 6.0;
  double amplitude_mm = 12.0;
  std::vector<Target> targets;
  std::vector<int> sequence;  // goal target ids, in order
  double start_mm = 0.0;      // cursor start position
  int block = 0;
  bool practice = false;
  int trial_index = 0;
};

// Two targets centered on the display, A apart, six alternating selections
// starting with the right target; the cursor starts on the left target.
TaskSpec make_study1_trial(double width_mm, double amplitude_mm);

// One block: each (W, A) in widths x amplitudes appears exactly twice, in
// seeded shuffled order. Defaults give 12 trials.
std::vector<TaskSpec> make_study1_block(std::mt19937_64& rng,
                                        std::span<const double> widths,
                                        std::span<const double> amplitudes,
                                        int block_index);

struct Study1Config {
  std::vector<double> widths_mm = {3.0, 6.0, 9.0};
  std::vector<double> amplitudes_mm = {12.0, 15.0};
  int blocks = 4;  // block 0 is practice
  int reps_per_block = 2;
  std::uint64_t seed = 7;
};

// blocks x (widths x amplitudes x reps) trials; block 0 flagged practice.
// Defaults: 48 trials, 288 selections, 216 after practice removal.
std::vector<TaskSpec> make_study1_protocol(const Study1Config& cfg = {});

// Three fixed targets (W=6, A=12 spacing); four selections: a seeded start
// plus one repeat, one adjacent and one non-adjacent move in shuffled order.
TaskSpec make_study2_trial(std::mt19937_64& rng);

// All goal sequences reachable from start under the one-repeat/one-adjacent/
// one-non-adjacent constraint (target indices 0,1,2 left to right).
std::vector<std::array<int, 3>> enumerate_study2_sequences(int start);

struct Study2Config {
  int blocks = 5;  // block 0 is practice
  int trials_per_block = 6;
  std::uint64_t seed = 11;
};

std::vector<TaskSpec> make_study2_protocol(const Study2Config& cfg = {});

// --- records and metrics ---------------------------------------------------

struct SelectionRecord {
  int goal_id = 0;
  double goal_center_mm = 0.0;
  double width_mm = 0.0;
  double amplitude_nominal_mm = 0.0;
  double endpoint_mm = 0.0;   // selection coordinate
  double prev_mm = 0.0;       // position the movement started from
  double t_start = 0.0;
  double t_select = 0.0;
  bool error = false;         // wrong target, wrong edge, or off-target pinch
  bool missing = false;       // no selection observed (pipeline failure)
  int re_entries = 0;         // goal re-entries before selection
};

struct TrialRecord {
  TaskSpec spec;
  Method method = Method::kDoubleCrossing;
  bool haptics = false;
  std::uint64_t seed = 0;
  std::vector<SelectionRecord> selections;
};

struct FittsFit {
  double a = 0.0;   // seconds
  double b = 0.0;   // seconds per bit
  double r2 = 0.0;
};

struct FitPoint {
  double id_e = 0.0;
  double mt = 0.0;
};

// Least squares MT = a + b*ID_e. Requires >= 3 points with ID_e spread,
// otherwise nullopt (fit unavailable).
std::optional<FittsFit> fit_fitts(std::span<const FitPoint> points);
inline double evaluate_mt(const FittsFit& f, double id_e) { return f.a + f.b * id_e; }

inline constexpr double kWeSigmaFactor = 4.133;
inline constexpr double kWeFloorMm = 0.1;

// log2(a_e/w_e + 1); w_e below the floor is clamped (caller should flag it).
double effective_id(double a_e, double w_e);

struct ConditionStats {
  double width_mm = 0.0, amplitude_mm = 0.0;
  int selections = 0, errors = 0, missing = 0, trials = 0, re_entries = 0;
  double a_e = 0.0, w_e = 0.0, id_e = 0.0;
  bool w_e_floored = false;
  double mt_mean = 0.0;
  double tp = 0.0;  // id_e / mt_mean
  double er_pct = 0.0;
  double tre_per_trial = 0.0;
};

struct MethodSummary {
  int study = 1;
  Method method = Method::kDoubleCrossing;
  bool haptics = false;
  std::vector<ConditionStats> cells;  // per (W, A), empty cells omitted
  double tp_mean_of_means = 0.0;
  double tp_pooled = 0.0;
  double mt_mean = 0.0;
  double er_pct = 0.0;
  double tre_per_trial = 0.0;
  std::optional<FittsFit> fit;  // across the per-condition (ID_e, MT) points
  int trials = 0, selections = 0, errors = 0, missing = 0;
};

struct FittsSummary {
  std::vector<MethodSummary> groups;  // by (study, method, haptics)
};

// Aggregates non-practice trials. Cells with fewer than two scoreable
// selections are omitted.
FittsSummary summarize(std::span<const TrialRecord> records);

}  // namespace sonar
