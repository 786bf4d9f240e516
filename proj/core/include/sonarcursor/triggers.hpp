#pragma once

// triggers - selection state machines over a 25 Hz cursor stream plus an
// IMU-driven pinch detector. Coordinates are 1D screen millimetres.
//
// Double-crossing: entering a target highlights it as candidate; exiting via
// the entry edge selects (coordinate taken at the in-target velocity reversal,
// interpolated between frames); exiting via the opposite edge cancels.
// Dwell: 500 ms of continuous residence in the highlighted target selects at
// the position held at timer expiry. Dwell never emits error_select.
// Pinch: an IMU burst selects at the cursor position offset_ms before the
// detection (0 = at detection), read from a short cursor history.
//
// In merged streams, pinch detections at a timestamp equal to a cursor
// frame's are processed before that cursor frame.

#include <array>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "sonarcursor/simulate.hpp"
#include "sonarcursor/tracking.hpp"

namespace sonar {

struct Target {
  int id = 0;
  double center_mm = 0.0;
  double width_mm = 0.0;

  double left() const { return center_mm - width_mm / 2.0; }
  double right() const { return center_mm + width_mm / 2.0; }
  bool contains(double x) const { return x >= left() && x <= right(); }
};

// Throws ConfigError if targets overlap, have non-positive width, or share ids.
void validate_targets(std::span<const Target> targets);

enum class Method { kDoubleCrossing, kDwell, kPinch };
enum class EventKind { kEnter, kExit, kSelect, kCancel, kErrorSelect, kHapticPulse };

struct HapticPulse {
  double duration_ms = 0.0;
  double intensity = 0.0;  // 0..1
};

struct TriggerEvent {
  EventKind kind = EventKind::kEnter;
  Method method = Method::kDoubleCrossing;
  double time_s = 0.0;
  double coordinate_mm = 0.0;
  std::optional<int> target_id;
  std::optional<HapticPulse> haptic;  // set on kHapticPulse only
};

const char* to_string(EventKind k);
const char* to_string(Method m);

class DoubleCrossingTrigger {
 public:
  explicit DoubleCrossingTrigger(std::vector<Target> targets);

  // One cursor frame; highlighted is the study goal (selects elsewhere become
  // error_select). Emits enter/exit plus select/cancel/error_select.
  std::vector<TriggerEvent> step(const CursorState& cursor,
                                 std::optional<int> highlighted);
  void reset();

 private:
  struct Candidate {
    size_t target = 0;
    int entry_edge = 0;  // -1 entered across left edge, +1 across right, 0 unknown
    std::optional<double> vertex;  // interpolated reversal coordinate
  };
  std::vector<Target> targets_;
  std::optional<Candidate> cand_;
  double p1_ = 0.0, p2_ = 0.0;  // last two positions (p2 newest)
  int seen_ = 0;

  std::optional<size_t> target_at(double x) const;
};

class DwellTrigger {
 public:
  explicit DwellTrigger(std::vector<Target> targets, double dwell_ms = 500.0);

  std::vector<TriggerEvent> step(const CursorState& cursor,
                                 std::optional<int> highlighted);
  void reset();

 private:
  std::vector<Target> targets_;
  double dwell_s_;
  std::optional<int> cur_high_;
  bool inside_ = false;
  double enter_t_ = 0.0;

  const Target* find(int id) const;
};

struct PinchDetectorConfig {
  double rate_hz = 100.0;
  double highpass_hz = 15.0;
  double threshold = 4.6;     // m/s^2 on the high-passed magnitude; calibrated
                              // against synthesize_imu's default noise/burst
  double refractory_s = 0.2;  // ignore re-crossings within this window
};

// Per-axis 2nd-order Butterworth high-pass, threshold on the filtered
// magnitude, refractory suppression. Detection time is the first sample at or
// above threshold.
class PinchDetector {
 public:
  explicit PinchDetector(const PinchDetectorConfig& cfg = {});

  std::optional<double> push(const std::array<double, 3>& accel, double t);
  std::vector<double> detect(const ImuStream& imu);  // batch convenience
  void reset();

 private:
  struct Biquad {
    double b0 = 0, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
    double z1 = 0, z2 = 0;
    double step(double x);
  };
  PinchDetectorConfig cfg_;
  Biquad hp_[3];
  double last_detect_ = -1.0;
  bool armed_ = true;
};

class PinchTrigger {
 public:
  PinchTrigger(std::vector<Target> targets, double offset_ms = 0.0,
               double history_s = 1.0);

  // Cursor frames feed the history and produce enter/exit events.
  std::vector<TriggerEvent> step(const CursorState& cursor,
                                 std::optional<int> highlighted);
  // A pinch detection at time t selects at the cursor offset_ms earlier.
  // Throws ContractViolation if the offset reaches past the stored history.
  std::vector<TriggerEvent> pinch(double t, std::optional<int> highlighted);
  void reset();

 private:
  std::vector<Target> targets_;
  double offset_s_, history_s_;
  std::deque<std::pair<double, double>> hist_;  // (time, position)
  std::optional<size_t> inside_;

  std::optional<size_t> target_at(double x) const;
};

struct HapticsConfig {
  bool enabled = true;
  double enter_ms = 10.0;
  double enter_intensity = 0.5;
  double select_ms = 20.0;
  double select_intensity = 1.0;
};

// Appends a haptic_pulse after every enter (short, half intensity) and every
// select/error_select (long, full intensity; the device confirms the
// selection it executed, right or wrong). Disabled passes events through.
std::vector<TriggerEvent> apply_haptics(const std::vector<TriggerEvent>& events,
                                        const HapticsConfig& cfg);

}  // namespace sonar
