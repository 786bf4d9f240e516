// Microbenchmarks for the per-frame tracking path. The product constraint is
// real-time factor: one 40 ms frame must track in well under 15 ms.

#include <benchmark/benchmark.h>

#include "sonarcursor/signals.hpp"
#include "sonarcursor/simulate.hpp"
#include "sonarcursor/tracking.hpp"

namespace {

std::vector<sonar::AudioFrame> make_frames(double duration_s) {
  sonar::SonarConfig cfg;
  sonar::SceneConfig scene;
  sonar::FingerConfig finger;
  finger.trajectory.hold(0.5).min_jerk(0.8, 30.0).hold(duration_s - 1.3);
  scene.finger = finger;
  scene.noise_snr_db = 40.0;
  scene.seed = 3;
  scene.duration_s = duration_s;
  const auto sim = sonar::synthesize_echo(scene, cfg);
  std::vector<sonar::AudioFrame> frames;
  for (std::size_t i = 0; i + cfg.frame_len <= sim.audio.size(); i += cfg.frame_len) {
    sonar::AudioFrame f;
    f.samples.assign(sim.audio.begin() + i, sim.audio.begin() + i + cfg.frame_len);
    f.start_time = i / cfg.sample_rate;
    frames.push_back(std::move(f));
  }
  return frames;
}

void BM_TrackFrame(benchmark::State& state) {
  const auto frames = make_frames(4.0);
  sonar::Tracker tracker;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tracker.process(frames[i]));
    if (++i == frames.size()) {  // restart to keep the window warm but bounded
      i = 0;
      state.PauseTiming();
      tracker = sonar::Tracker();
      state.ResumeTiming();
    }
  }
}
BENCHMARK(BM_TrackFrame)->Unit(benchmark::kMillisecond);

void BM_Demodulate(benchmark::State& state) {
  const auto frames = make_frames(2.0);
  sonar::SonarConfig cfg;
  sonar::IqDemodulator demod(cfg);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(demod.process(frames[i]));
    if (++i == frames.size()) i = 0;
  }
}
BENCHMARK(BM_Demodulate)->Unit(benchmark::kMillisecond);

void BM_LevdSample(benchmark::State& state) {
  sonar::LevdFilter levd{sonar::LevdConfig{}};
  double t = 0.0;
  double ph = 0.0;
  for (auto _ : state) {
    ph += 0.01;
    const std::complex<double> z = std::polar(0.02, ph) + std::complex<double>(0.05, 0.01);
    benchmark::DoNotOptimize(levd.push(z, t));
    t += 1.0 / 480.0;
  }
}
BENCHMARK(BM_LevdSample);

}  // namespace

BENCHMARK_MAIN();
