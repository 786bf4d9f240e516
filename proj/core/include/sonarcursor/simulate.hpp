#pragma once

// simulate - deterministic acoustic scene and IMU synthesis. The transducer
// pair is co-located; an echo from range r arrives with round-trip delay
// 2r/c, realized narrowband-exactly as a carrier phase shift of
// -4*pi*r/wavelength. A fixed seed yields byte-identical output.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sonarcursor/signals.hpp"

namespace sonar {

enum class SegmentKind { kHold, kConstantVelocity, kMinJerk };

struct Segment {
  SegmentKind kind = SegmentKind::kHold;
  double duration_s = 0.0;
  double delta_mm = 0.0;  // ignored for kHold
};

// Piecewise 1D position profile, continuous across segments by construction
// (each segment starts where the previous ended). Durations must be positive.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<Segment> segments);

  double position(double t) const;  // clamped to [start, end]
  double duration() const { return total_; }
  double net_delta() const;
  const std::vector<Segment>& segments() const { return segs_; }

  Trajectory& hold(double duration_s);
  Trajectory& constant_velocity(double duration_s, double delta_mm);
  Trajectory& min_jerk(double duration_s, double delta_mm);

 private:
  std::vector<Segment> segs_;
  std::vector<double> seg_end_t_, seg_end_x_;
  double total_ = 0.0;
  void append(Segment s);
};

struct Reflector {
  double range_mm = 0.0;
  double gain = 0.0;  // echo amplitude as a fraction of the carrier amplitude
};

struct FingerConfig {
  double start_range_mm = 50.0;
  double gain = 0.25;      // reflection gain before distance attenuation
  Trajectory trajectory;   // relative displacement applied to start_range_mm
};

// Distant person pacing: the coherent residual of many body-part echoes,
// modeled as one far reflector whose range and strength breathe at the
// walking cadence. Its amplitude hovers near the tracker's phase gate, so it
// intermittently captures the residual vector while the finger is at rest;
// the swing bounds the drift that capture can cause.
struct WalkerConfig {
  double period_s = 2.0;
  double gain = 0.015;
  double range_mm = 1000.0;
  double range_swing_mm = 0.4;
  double am_depth = 0.3;
};

struct SceneConfig {
  std::vector<Reflector> static_reflectors = {{10.0, 0.40}, {45.0, 0.15}};
  std::optional<FingerConfig> finger;
  // White mic noise, dB below the finger echo amplitude at its start range
  // (below the strongest static reflector when no finger is present).
  std::optional<double> noise_snr_db;
  std::optional<WalkerConfig> walker;
  std::uint64_t seed = 0;
  double duration_s = 0.0;  // 0 -> finger trajectory duration

  void validate() const;  // throws ConfigError
};

// Finger echo amplitude attenuation: inverse-square with a 30 mm floor.
double range_attenuation(double range_mm);
inline constexpr double kAttenuationFloorMm = 30.0;

struct TruthSample {
  double time_s = 0.0;
  double range_mm = 0.0;
};

struct EchoSim {
  std::vector<double> audio;        // at cfg.sample_rate, carrier phase0 = 0
  std::vector<TruthSample> truth;   // finger range at baseband_rate
  double noise_sigma = 0.0;         // realized mic-noise std deviation
};

EchoSim synthesize_echo(const SceneConfig& scene, const SonarConfig& cfg);

// --- IMU ----------------------------------------------------------------

struct ImuBurst {
  double peak = 12.0;     // m/s^2 envelope peak
  double decay_s = 0.05;  // exponential envelope time constant
  double freq_lo_hz = 30.0;
  double freq_hi_hz = 45.0;
  double span_s = 0.18;   // truncation; envelope is ~2.7% of peak by then
};

struct ImuConfig {
  double rate_hz = 100.0;
  double duration_s = 0.0;
  double noise_rms = 1.0;  // per-axis white noise, m/s^2
  ImuBurst burst;
  std::vector<double> pinch_times;  // sorted; pairwise gaps must exceed 0.2 s
  std::uint64_t seed = 0;

  void validate() const;
};

struct ImuStream {
  double rate_hz = 100.0;
  std::vector<std::array<double, 3>> samples;  // accel x,y,z
  double time_at(size_t i) const { return static_cast<double>(i) / rate_hz; }
};

// Gaussian baseline noise plus, at each pinch time, a damped 30-45 Hz burst
// on one axis. Burst frequency and axis are drawn per burst from the seed.
// Zero noise and no pinches yields an exactly zero stream.
ImuStream synthesize_imu(const ImuConfig& cfg);

// --- linear stage protocol ----------------------------------------------

struct StageProtocolConfig {
  std::vector<double> range_lo_mm = {0.0, 50.0, 100.0, 150.0};  // 50 mm bands
  std::vector<double> speeds_mm_s = {40.0, 80.0, 120.0};
  int reps = 10;
  double move_mm = 50.0;
  double hold_s = 1.0;
  double clean_snr_db = 40.0;  // mic floor in the quiet condition
  double noisy_snr_db = 25.0;  // added noise in the walker condition
  WalkerConfig walker;
  std::vector<Reflector> static_reflectors = {{10.0, 0.40}, {45.0, 0.15}};
  double finger_gain = 0.25;
  std::uint64_t seed = 1;
};

struct StageTrial {
  double range_lo_mm = 0.0;
  double speed_mm_s = 0.0;
  bool noise_on = false;
  int rep = 0;
  bool downward = false;  // odd reps run hi -> lo
  SceneConfig scene;
};

// Full factorial ranges x speeds x {clean, noisy} x reps; each trial is one
// hold / constant-velocity 50 mm sweep / hold scene. Defaults: 240 trials.
std::vector<StageTrial> linear_stage_protocol(const StageProtocolConfig& cfg = {});

// --- JSON ----------------------------------------------------------------

SceneConfig parse_scene_json(const std::string& text);      // throws ConfigError
std::string scene_to_json(const SceneConfig& scene);        // canonical form

}  // namespace sonar
