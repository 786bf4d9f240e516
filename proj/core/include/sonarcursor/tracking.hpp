#pragma once

// tracking - turns complex baseband into a 1D cursor. Static clutter is
// estimated from local extreme values of the I/Q channels, the residual
// dynamic vector's phase is unwrapped and converted to displacement
// (displacement_mm = -unwrapped_phase * wavelength / (4*pi); the round-trip
// path changes by twice the finger displacement), and the per-frame result is
// smoothed with an adaptive lowpass whose cutoff rises with speed.

#include <complex>
#include <deque>
#include <vector>

#include "sonarcursor/signals.hpp"

namespace sonar {

struct LevdConfig {
  // Minimum peak-to-peak swing of an I or Q channel before an extrema pair
  // re-estimates that channel's static component. Default is 5% of the
  // baseband magnitude of a full-scale echo (0.9 carrier amplitude -> 0.45).
  double pp_threshold = 0.0225;
  double max_hold_s = 2.0;        // staleness horizon for the static estimate
  double hysteresis_frac = 0.5;   // reversal (as fraction of pp_threshold)
                                  // needed to commit a local extremum
};

struct Extremum {
  int channel = 0;  // 0 = real, 1 = imag
  bool is_max = false;
  double value = 0.0;
  double time = 0.0;
};

// Static-clutter estimator. Consecutive max/min pairs on a channel whose
// swing reaches pp_threshold re-estimate that channel's static component as
// the pair midpoint. Before the first pair the estimate is the running mean.
class LevdFilter {
 public:
  explicit LevdFilter(const LevdConfig& cfg = {});

  // Feed one baseband sample; returns dynamic = sample - static estimate,
  // with the estimate as of this sample.
  std::complex<double> push(std::complex<double> sample, double time);

  std::complex<double> static_estimate() const { return {est_[0], est_[1]}; }
  // True when no extrema-pair refresh happened within max_hold_s.
  bool stale(double now) const;
  double last_refresh_time() const { return last_refresh_; }
  const std::deque<Extremum>& recent_extrema() const { return recent_; }
  const LevdConfig& config() const { return cfg_; }

 private:
  struct Channel {
    double cand_max = 0.0, cand_min = 0.0, t_max = 0.0, t_min = 0.0;
    int dir = 0;  // +1 rising, -1 falling, 0 unknown
    double last_max = 0.0, last_min = 0.0;
    bool has_max = false, has_min = false;
    bool seeded = false;
    bool refreshed = false;  // at least one extrema-pair refresh
    double mean_acc = 0.0;
    long long mean_n = 0;
  };
  void feed_channel(int ch, double x, double t);

  LevdConfig cfg_;
  Channel chan_[2];
  double est_[2] = {0.0, 0.0};
  double last_refresh_ = 0.0;
  bool any_refresh_ = false;
  std::deque<Extremum> recent_;
};

// Streaming gated phase unwrapper. Samples with |dynamic| below the gate hold
// the previous phase and displacement exactly; the next valid sample
// re-anchors without a jump (movement during a gated stretch is dropped, not
// extrapolated). Invariant: |last_wrapped| <= pi.
class PhaseUnwrapper {
 public:
  PhaseUnwrapper(double wavelength_mm, double gate);

  double push(std::complex<double> dynamic);  // returns displacement_mm

  double unwrapped() const { return u_; }
  double last_wrapped() const { return last_w_; }
  bool primed() const { return primed_; }
  // displacement = -unwrapped * wavelength / (4*pi); path change is twice that.
  double displacement_mm() const;
  double path_change_mm() const { return 2.0 * displacement_mm(); }
  void seed(double unwrapped, double last_wrapped, bool primed);

 private:
  double wl_, gate_;
  double u_ = 0.0, last_w_ = 0.0;
  bool primed_ = false;
};

struct OneEuroConfig {
  double min_cutoff = 1.0;  // Hz
  double beta = 0.01;       // cutoff gain per unit speed (here: per mm/s)
  double d_cutoff = 1.0;    // Hz, derivative smoothing cutoff
};

// Adaptive exponential smoother: cutoff = min_cutoff + beta*|dx_hat|.
// Step responses are monotone (no overshoot); faster inputs get less lag.
class OneEuroFilter {
 public:
  explicit OneEuroFilter(const OneEuroConfig& cfg = {});

  // Timestamps must strictly increase, else ContractViolation.
  double filter(double x, double t);

  double value() const { return x_hat_; }
  double velocity() const { return dx_hat_; }  // smoothed derivative, mm/s
  void reset();

 private:
  OneEuroConfig cfg_;
  double x_hat_ = 0.0, dx_hat_ = 0.0, prev_x_ = 0.0, last_t_ = 0.0;
  bool primed_ = false;
};

struct CursorState {
  double position_mm = 0.0;
  double velocity_mm_s = 0.0;
  double time_s = 0.0;
  double quality = 0.0;  // in [0,1]: mean |dynamic| vs pp_threshold, halved
                         // while the static estimate is stale
};

struct TrackerConfig {
  SonarConfig sonar;
  LevdConfig levd;
  OneEuroConfig euro;
  double gate_frac = 0.25;  // phase gate: |dynamic| < gate_frac*pp_threshold
  double window_s = 2.0;    // retrospective re-unwrap horizon
};

// Frame-level pipeline: demodulate -> clutter removal -> phase -> smoothing.
// Each call consumes one frame_len audio frame and yields one cursor sample.
// The unwrapped phase of the trailing window is re-derived every frame with
// the current static estimate, so clutter refreshes correct the recent past
// (movement onsets would otherwise under-read while the at-rest echo is still
// folded into the static estimate). Output per frame stays causal.
class Tracker {
 public:
  explicit Tracker(const TrackerConfig& cfg = {});

  CursorState process(const AudioFrame& frame);

  double raw_displacement_mm() const { return raw_disp_; }  // pre-smoothing
  const LevdFilter& levd() const { return levd_; }
  double group_delay_seconds() const { return demod_.group_delay_seconds(); }
  // (time, displacement_mm) per baseband sample of the current window.
  std::vector<std::pair<double, double>> window_track() const;
  const TrackerConfig& config() const { return cfg_; }

 private:
  TrackerConfig cfg_;
  IqDemodulator demod_;
  LevdFilter levd_;
  OneEuroFilter euro_;
  std::deque<std::complex<double>> win_;
  std::deque<double> win_t_;
  std::vector<double> u_;       // per-window-sample unwrapped phase
  std::vector<double> lastw_;   // unwrapper last_wrapped after each sample
  std::vector<char> primed_;
  double anchor_u_ = 0.0, anchor_lastw_ = 0.0;
  bool anchor_primed_ = false;
  size_t win_cap_ = 0;
  int skip_ = 0;  // demod warm-up baseband samples left to discard
  double raw_disp_ = 0.0;
  double last_time_ = 0.0;
  bool have_time_ = false;
};

}  // namespace sonar
