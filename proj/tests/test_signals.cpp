#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "sonarcursor/signals.hpp"

using namespace sonar;
using std::numbers::pi;

namespace {

// Direct DFT at one frequency; independent of the demodulator's internals.
std::complex<double> dft_bin(const std::vector<double>& x, double freq, double fs) {
  std::complex<double> acc{0.0, 0.0};
  for (size_t k = 0; k < x.size(); ++k) {
    const double ph = -2.0 * pi * freq * static_cast<double>(k) / fs;
    acc += x[k] * std::complex<double>(std::cos(ph), std::sin(ph));
  }
  return acc;
}

std::complex<double> freq_response(const std::vector<double>& taps, double freq, double fs) {
  std::complex<double> acc{0.0, 0.0};
  for (size_t k = 0; k < taps.size(); ++k) {
    const double ph = -2.0 * pi * freq * static_cast<double>(k) / fs;
    acc += taps[k] * std::complex<double>(std::cos(ph), std::sin(ph));
  }
  return acc;
}

// Feed a long signal through a fresh demodulator frame by frame; returns the
// concatenated baseband with the warm-up prefix dropped.
std::vector<std::complex<double>> demod_settled(const SonarConfig& cfg,
                                                const std::vector<double>& x) {
  REQUIRE(x.size() % static_cast<size_t>(cfg.frame_len) == 0);
  IqDemodulator demod(cfg);
  std::vector<std::complex<double>> all;
  const size_t flen = static_cast<size_t>(cfg.frame_len);
  for (size_t off = 0; off < x.size(); off += flen) {
    AudioFrame f;
    f.samples.assign(x.begin() + static_cast<long>(off),
                     x.begin() + static_cast<long>(off + flen));
    f.start_time = static_cast<double>(off) / cfg.sample_rate;
    BasebandFrame bb = demod.process(f);
    all.insert(all.end(), bb.samples.begin(), bb.samples.end());
  }
  const size_t skip = static_cast<size_t>(demod.warmup_baseband_samples());
  REQUIRE(all.size() > skip + 4);
  return {all.begin() + static_cast<long>(skip), all.end()};
}

std::vector<double> delayed_carrier(const SonarConfig& cfg, int n, double tau_s) {
  std::vector<double> x(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / cfg.sample_rate;
    x[static_cast<size_t>(k)] =
        cfg.amplitude * std::cos(2.0 * pi * cfg.carrier_freq * (t - tau_s));
  }
  return x;
}

}  // namespace

TEST_CASE("config validation") {
  SonarConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.wavelength_mm() == doctest::Approx(17.15).epsilon(1e-12));
  CHECK(cfg.decimation() == 100);
  CHECK(cfg.frame_rate() == doctest::Approx(25.0));

  SonarConfig bad = cfg;
  bad.carrier_freq = 25000.0;  // above Nyquist
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = cfg;
  bad.baseband_rate = 481.0;  // not a divisor of the sample rate
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = cfg;
  bad.frame_len = 1919;  // fractional frames per second
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("carrier sample values and phase chaining") {
  SonarConfig cfg;
  AudioFrame f = generate_carrier(cfg, 96);
  REQUIRE(f.samples.size() == 96);
  CHECK(f.samples[0] == doctest::Approx(0.9).epsilon(1e-12));
  // phase step per sample is 2*pi*20000/48000 = 5*pi/6
  CHECK(f.samples[1] == doctest::Approx(0.9 * std::cos(5.0 * pi / 6.0)).epsilon(1e-12));
  CHECK(std::abs(f.samples[3]) < 1e-12);  // 2.5*pi

  AudioFrame q = generate_carrier(cfg, 8, pi / 2.0);
  CHECK(std::abs(q.samples[0]) < 1e-12);

  // 1920 samples advance the phase by 1600*pi: exactly back to the start.
  CHECK(carrier_phase_after(cfg, 1920, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
  const double ph = carrier_phase_after(cfg, 7, 0.3);
  AudioFrame a = generate_carrier(cfg, 14, 0.3);
  AudioFrame b = generate_carrier(cfg, 7, ph);
  for (int k = 0; k < 7; ++k)
    CHECK(a.samples[static_cast<size_t>(7 + k)] ==
          doctest::Approx(b.samples[static_cast<size_t>(k)]).epsilon(1e-9));
}

TEST_CASE("carrier energy sits in the 20 kHz bin") {
  SonarConfig cfg;
  AudioFrame f = generate_carrier(cfg, 4800);  // 0.1 s, 2000 whole cycles
  const double peak = std::abs(dft_bin(f.samples, 20000.0, cfg.sample_rate));
  CHECK(peak == doctest::Approx(4800.0 / 2.0 * 0.9).epsilon(1e-9));
  // neighbouring whole-cycle bins are orthogonal
  CHECK(std::abs(dft_bin(f.samples, 19900.0, cfg.sample_rate)) < 1e-6 * peak);
  CHECK(std::abs(dft_bin(f.samples, 20100.0, cfg.sample_rate)) < 1e-6 * peak);
}

TEST_CASE("lowpass design meets its spec") {
  const double fs = 48000.0;
  const std::vector<double> taps = design_lowpass(fs, 120.0, 360.0, 70.0);
  REQUIRE(!taps.empty());
  CHECK(taps.size() % 2 == 1);
  for (size_t k = 0; k < taps.size() / 2; ++k)
    CHECK(taps[k] == doctest::Approx(taps[taps.size() - 1 - k]).epsilon(1e-12));

  double dc = 0.0;
  for (double t : taps) dc += t;
  CHECK(dc == doctest::Approx(1.0).epsilon(1e-9));

  for (double f : {360.0, 500.0, 1000.0, 5000.0, 20000.0})
    CHECK(std::abs(freq_response(taps, f, fs)) <= std::pow(10.0, -70.0 / 20.0));
  for (double f : {0.0, 60.0, 120.0})
    CHECK(std::abs(freq_response(taps, f, fs)) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("pure carrier demodulates to a positive real constant") {
  SonarConfig cfg;
  const std::vector<double> x = generate_carrier(cfg, 48000).samples;
  for (const auto& s : demod_settled(cfg, x)) {
    CHECK(s.real() > 0.0);
    CHECK(std::abs(s.imag()) < 1e-3 * s.real());
    CHECK(std::abs(s) == doctest::Approx(0.45).epsilon(1e-3));
  }
}

TEST_CASE("half-wavelength delay lands at phase -pi") {
  SonarConfig cfg;
  const double lambda_m = cfg.speed_of_sound / cfg.carrier_freq;
  const double tau = lambda_m / 2.0 / cfg.speed_of_sound;
  for (const auto& s : demod_settled(cfg, delayed_carrier(cfg, 48000, tau))) {
    // arg(s) == -pi up to wrap; measure the distance on the circle
    const double d = std::abs(std::arg(-s));
    CHECK(d <= 0.01);
  }
}

TEST_CASE("demodulation is linear") {
  SonarConfig cfg;
  const int n = 9600;
  const std::vector<double> x = generate_carrier(cfg, n, 0.0).samples;
  const std::vector<double> y = generate_carrier(cfg, n, 1.0).samples;
  std::vector<double> mix(static_cast<size_t>(n));
  const double a = 0.3, b = 0.6;
  for (int k = 0; k < n; ++k)
    mix[static_cast<size_t>(k)] = a * x[static_cast<size_t>(k)] +
                                  b * y[static_cast<size_t>(k)];
  // fresh demodulators, identical oscillator start
  IqDemodulator dx(cfg), dy(cfg), dm(cfg);
  const size_t flen = static_cast<size_t>(cfg.frame_len);
  for (size_t off = 0; off < mix.size(); off += flen) {
    auto frame = [&](const std::vector<double>& src) {
      AudioFrame f;
      f.samples.assign(src.begin() + static_cast<long>(off),
                       src.begin() + static_cast<long>(off + flen));
      return f;
    };
    BasebandFrame bx = dx.process(frame(x)), by = dy.process(frame(y)),
                  bm = dm.process(frame(mix));
    REQUIRE(bx.samples.size() == bm.samples.size());
    for (size_t i = 0; i < bm.samples.size(); ++i)
      CHECK(std::abs(bm.samples[i] - (a * bx.samples[i] + b * by.samples[i])) < 1e-6);
  }
}

TEST_CASE("static echo phase does not drift") {
  SonarConfig cfg;
  const std::vector<double> x = generate_carrier(cfg, 96000, 0.7).samples;  // 2 s
  auto s = demod_settled(cfg, x);
  const double first = std::arg(s.front());
  for (const auto& v : s) {
    double d = std::arg(v) - first;
    while (d > pi) d -= 2.0 * pi;
    while (d < -pi) d += 2.0 * pi;
    CHECK(std::abs(d) < 0.02);  // < 0.01 rad/s over 2 s
  }
}

TEST_CASE("off-band tone is rejected") {
  SonarConfig cfg;
  std::vector<double> x(48000);
  for (int k = 0; k < 48000; ++k)
    x[static_cast<size_t>(k)] = 0.9 * std::cos(2.0 * pi * 18000.0 * k / cfg.sample_rate);
  for (const auto& s : demod_settled(cfg, x))
    CHECK(std::abs(s) <= 1e-3 * 0.45);  // vs an equal-amplitude echo's baseband
}

TEST_CASE("stream cadence: five frames carry 96 baseband samples") {
  SonarConfig cfg;
  IqDemodulator demod(cfg);
  std::vector<size_t> counts;
  std::vector<double> stamps;
  double phase = 0.0;
  for (int i = 0; i < 25; ++i) {
    AudioFrame f = generate_carrier(cfg, cfg.frame_len, phase,
                                    static_cast<double>(i) * cfg.frame_dt());
    phase = carrier_phase_after(cfg, cfg.frame_len, phase);
    BasebandFrame bb = demod.process(f);
    counts.push_back(bb.samples.size());
    CHECK(bb.rate == doctest::Approx(480.0));
    for (size_t k = 0; k < bb.samples.size(); ++k)
      stamps.push_back(bb.start_time + static_cast<double>(k) / bb.rate);
  }
  for (size_t c : counts) CHECK((c == 19 || c == 20));
  for (size_t i = 0; i + 5 <= counts.size(); ++i) {
    size_t five = 0;
    for (size_t j = i; j < i + 5; ++j) five += counts[j];
    CHECK(five == 96);
  }
  for (size_t i = 1; i < stamps.size(); ++i)
    CHECK(stamps[i] - stamps[i - 1] == doctest::Approx(1.0 / 480.0).epsilon(1e-9));
}

TEST_CASE("group delay and warm-up are reported") {
  SonarConfig cfg;
  IqDemodulator demod(cfg);
  CHECK(demod.group_delay_seconds() > 0.0);
  CHECK(demod.group_delay_seconds() < 0.1);
  CHECK(demod.warmup_baseband_samples() > 0);
  CHECK(demod.warmup_baseband_samples() < 480);
  CHECK(demod.taps().size() % 2 == 1);
}

TEST_CASE("frame length contract") {
  SonarConfig cfg;
  IqDemodulator demod(cfg);
  AudioFrame f = generate_carrier(cfg, cfg.frame_len - 1);
  CHECK_THROWS_AS(demod.process(f), ContractViolation);
}

TEST_CASE("reset restores the initial state exactly") {
  SonarConfig cfg;
  AudioFrame f = generate_carrier(cfg, cfg.frame_len);
  IqDemodulator demod(cfg);
  BasebandFrame a = demod.process(f);
  demod.reset();
  BasebandFrame b = demod.process(f);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);

  BasebandFrame c = iq_demodulate(f, cfg);
  REQUIRE(c.samples.size() == a.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == c.samples[i]);
}
