#include "sonarcursor/signals.hpp"

#include <cmath>
#include <numbers>

namespace sonar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Zeroth-order modified Bessel function of the first kind (power series).
double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-14 * sum) break;
  }
  return sum;
}

}  // namespace

void SonarConfig::validate() const {
  if (sample_rate <= 0 || carrier_freq <= 0 || baseband_rate <= 0)
    throw ConfigError("sonar config: rates must be positive");
  if (carrier_freq >= sample_rate / 2.0)
    throw ConfigError("sonar config: carrier at or above Nyquist");
  if (frame_len <= 0) throw ConfigError("sonar config: frame_len must be positive");
  const double decim = sample_rate / baseband_rate;
  if (std::abs(decim - std::round(decim)) > 1e-9)
    throw ConfigError("sonar config: sample_rate must be divisible by baseband_rate");
  const double fps = sample_rate / frame_len;
  if (std::abs(fps - std::round(fps)) > 1e-9)
    throw ConfigError("sonar config: frame_len must yield whole frames per second");
  if (amplitude <= 0.0 || amplitude > 1.0)
    throw ConfigError("sonar config: amplitude must be in (0, 1]");
  if (speed_of_sound <= 0) throw ConfigError("sonar config: speed_of_sound must be positive");
}

AudioFrame generate_carrier(const SonarConfig& cfg, int n, double phase0,
                            double start_time) {
  if (n <= 0) throw ContractViolation("generate_carrier: n must be positive");
  AudioFrame out;
  out.start_time = start_time;
  out.samples.resize(static_cast<size_t>(n));
  const double w = kTwoPi * cfg.carrier_freq / cfg.sample_rate;
  for (int i = 0; i < n; ++i)
    out.samples[static_cast<size_t>(i)] = cfg.amplitude * std::cos(phase0 + w * i);
  return out;
}

double carrier_phase_after(const SonarConfig& cfg, int n, double phase0) {
  const double w = kTwoPi * cfg.carrier_freq / cfg.sample_rate;
  double p = std::fmod(phase0 + w * n, kTwoPi);
  if (p < 0) p += kTwoPi;
  return p;
}

std::vector<double> design_lowpass(double sample_rate, double pass_hz,
                                   double stop_hz, double atten_db) {
  if (!(0 < pass_hz && pass_hz < stop_hz && stop_hz < sample_rate / 2.0))
    throw ConfigError("design_lowpass: need 0 < pass < stop < Nyquist");
  const double dw = kTwoPi * (stop_hz - pass_hz) / sample_rate;
  double beta = 0.0;
  if (atten_db > 50.0)
    beta = 0.1102 * (atten_db - 8.7);
  else if (atten_db >= 21.0)
    beta = 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  int n = static_cast<int>(std::ceil((atten_db - 7.95) / (2.285 * dw))) + 1;
  if (n % 2 == 0) ++n;  // odd length -> integer group delay, symmetric
  const int m = (n - 1) / 2;
  const double fc = 0.5 * (pass_hz + stop_hz) / sample_rate;  // cycles/sample
  std::vector<double> h(static_cast<size_t>(n));
  const double i0b = bessel_i0(beta);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const int k = i - m;
    const double sinc = (k == 0) ? 2.0 * fc
                                 : std::sin(kTwoPi * fc * k) / (std::numbers::pi * k);
    const double r = static_cast<double>(k) / m;
    const double win = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
    h[static_cast<size_t>(i)] = sinc * win;
    sum += h[static_cast<size_t>(i)];
  }
  for (double& v : h) v /= sum;  // exact unity DC gain
  return h;
}

IqDemodulator::IqDemodulator(const SonarConfig& cfg, double lo_phase0) : cfg_(cfg) {
  cfg_.validate();
  taps_ = design_lowpass(cfg_.sample_rate, 120.0, 360.0, 70.0);
  group_delay_ = (static_cast<double>(taps_.size()) - 1.0) / 2.0;
  reset(lo_phase0);
}

void IqDemodulator::reset(double lo_phase0) {
  mixed_i_.clear();
  mixed_q_.clear();
  next_out_ = 0;
  consumed_ = 0;
  lo_phase_ = lo_phase0;
}

int IqDemodulator::warmup_baseband_samples() const {
  // full filter span: magnitude is only settled once every tap has seen input
  return static_cast<int>(taps_.size() - 1) / cfg_.decimation() + 2;
}

BasebandFrame IqDemodulator::process(const AudioFrame& frame) {
  if (frame.samples.size() != static_cast<size_t>(cfg_.frame_len))
    throw ContractViolation("iq_demodulate: frame length != config frame_len");
  const int n = cfg_.frame_len;
  const double w = kTwoPi * cfg_.carrier_freq / cfg_.sample_rate;
  const size_t base = mixed_i_.size();
  mixed_i_.resize(base + static_cast<size_t>(n));
  mixed_q_.resize(base + static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double ph = lo_phase_ + w * i;
    const double x = frame.samples[static_cast<size_t>(i)];
    mixed_i_[base + static_cast<size_t>(i)] = x * std::cos(ph);
    mixed_q_[base + static_cast<size_t>(i)] = x * -std::sin(ph);
  }
  lo_phase_ = std::fmod(lo_phase_ + w * n, kTwoPi);

  BasebandFrame out;
  out.rate = cfg_.baseband_rate;
  const int decim = cfg_.decimation();
  const int ntaps = static_cast<int>(taps_.size());
  const long long have = consumed_ + static_cast<long long>(mixed_i_.size());
  bool first = true;
  // Output for global input index g convolves taps over (g-ntaps, g]; indices
  // before stream start are zero (cold filter). Timestamp refers to the filter
  // center, i.e. the scene at (g - group_delay)/fs.
  while (next_out_ < have) {
    const long long g = next_out_;
    double acc_i = 0.0, acc_q = 0.0;
    for (int k = 0; k < ntaps; ++k) {
      const long long idx = g - k;
      if (idx < consumed_) break;  // older history already dropped or pre-stream
      const size_t local = static_cast<size_t>(idx - consumed_);
      acc_i += taps_[static_cast<size_t>(k)] * mixed_i_[local];
      acc_q += taps_[static_cast<size_t>(k)] * mixed_q_[local];
    }
    if (first) {
      const double local = static_cast<double>(g - (have - n));
      out.start_time = frame.start_time + (local - group_delay_) / cfg_.sample_rate;
      first = false;
    }
    out.samples.emplace_back(acc_i, acc_q);
    next_out_ += decim;
  }
  // Keep exactly the history the next output still needs.
  const long long keep_from = next_out_ - (ntaps - 1);
  if (keep_from > consumed_) {
    const size_t drop = static_cast<size_t>(keep_from - consumed_);
    if (drop >= mixed_i_.size()) {
      mixed_i_.clear();
      mixed_q_.clear();
    } else {
      mixed_i_.erase(mixed_i_.begin(), mixed_i_.begin() + static_cast<long>(drop));
      mixed_q_.erase(mixed_q_.begin(), mixed_q_.begin() + static_cast<long>(drop));
    }
    consumed_ = keep_from;
  }
  return out;
}

BasebandFrame iq_demodulate(const AudioFrame& frame, const SonarConfig& cfg,
                            double carrier_phase) {
  IqDemodulator demod(cfg, carrier_phase);
  return demod.process(frame);
}

}  // namespace sonar
