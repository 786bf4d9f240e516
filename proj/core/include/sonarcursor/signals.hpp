#pragma once

// signals - continuous-wave carrier generation and I/Q demodulation to a
// decimated complex baseband. An echo with constant round-trip delay tau
// demodulates to a constant complex value of phase -2*pi*carrier_freq*tau.

#include <complex>
#include <cstddef>
#include <vector>

#include "sonarcursor/errors.hpp"

namespace sonar {

struct SonarConfig {
  double sample_rate = 48000.0;   // Hz, audio I/O rate
  double carrier_freq = 20000.0;  // Hz, near-inaudible, below Nyquist
  int frame_len = 1920;           // samples per processing frame (40 ms -> 25 Hz)
  double baseband_rate = 480.0;   // Hz, complex samples/s after decimation
  double speed_of_sound = 343.0;  // m/s
  double amplitude = 0.9;         // carrier amplitude, headroom below full scale

  double wavelength_mm() const { return 1000.0 * speed_of_sound / carrier_freq; }
  int decimation() const { return static_cast<int>(sample_rate / baseband_rate); }
  double frame_rate() const { return sample_rate / frame_len; }
  double frame_dt() const { return frame_len / sample_rate; }

  // Throws ConfigError unless: carrier below Nyquist, sample_rate divisible by
  // baseband_rate, frame_len consistent with a whole number of frames per second.
  void validate() const;
};

struct AudioFrame {
  std::vector<double> samples;
  double start_time = 0.0;  // seconds, time of samples[0]
};

// Complex baseband at baseband_rate. Sample timestamps are group-delay
// compensated: samples[i] describes the scene at start_time + i/rate.
// Stream invariant: any 5 consecutive frames carry exactly
// 5*frame_len*baseband_rate/sample_rate samples (19 or 20 each with defaults;
// the per-frame count is non-integral on average because frame_len is not a
// multiple of the decimation factor).
struct BasebandFrame {
  std::vector<std::complex<double>> samples;
  double rate = 0.0;        // Hz
  double start_time = 0.0;  // seconds, scene time of samples[0]
};

// n samples of amplitude*cos(2*pi*carrier_freq*t + phase0) starting at phase0.
// Chain frames by passing carrier_phase_after() of the previous call.
AudioFrame generate_carrier(const SonarConfig& cfg, int n, double phase0 = 0.0,
                            double start_time = 0.0);

// Carrier phase after advancing n samples from phase0, wrapped to [0, 2*pi).
double carrier_phase_after(const SonarConfig& cfg, int n, double phase0 = 0.0);

// Linear-phase lowpass FIR (windowed sinc, Kaiser window). Passband edge
// pass_hz, stopband edge stop_hz, at least atten_db stopband attenuation,
// unity DC gain, odd tap count.
std::vector<double> design_lowpass(double sample_rate, double pass_hz,
                                   double stop_hz, double atten_db);

// Streaming I/Q demodulator: mixes with cos/-sin of the local oscillator,
// lowpass filters (see design_lowpass; passband 120 Hz, stopband 360 Hz,
// 70 dB with the default config) and decimates to baseband_rate. Owns the
// oscillator phase, filter memory and decimation phase; feed frames in order.
class IqDemodulator {
 public:
  explicit IqDemodulator(const SonarConfig& cfg, double lo_phase0 = 0.0);

  // frame.samples.size() must equal cfg.frame_len, else ContractViolation.
  BasebandFrame process(const AudioFrame& frame);

  double group_delay_seconds() const { return group_delay_ / cfg_.sample_rate; }
  // Baseband samples earlier than this many are filter warm-up and carry a
  // ramp-scaled magnitude (phase is already correct for a single echo).
  int warmup_baseband_samples() const;
  const std::vector<double>& taps() const { return taps_; }
  void reset(double lo_phase0 = 0.0);

 private:
  SonarConfig cfg_;
  std::vector<double> taps_;
  double group_delay_ = 0.0;     // samples at sample_rate
  std::vector<double> mixed_i_;  // pending mixed history, newest at back
  std::vector<double> mixed_q_;
  long long next_out_ = 0;       // global input index of next decimated output
  long long consumed_ = 0;       // global input index of mixed_*[0]
  double lo_phase_ = 0.0;        // oscillator phase at the next input sample
};

// Single-frame convenience wrapper around a fresh IqDemodulator. Output
// leading samples are filter warm-up (magnitude ramps in, phase correct).
BasebandFrame iq_demodulate(const AudioFrame& frame, const SonarConfig& cfg,
                            double carrier_phase = 0.0);

}  // namespace sonar
