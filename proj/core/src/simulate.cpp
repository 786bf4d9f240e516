#include "sonarcursor/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

namespace sonar {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double minjerk_shape(double tau) {  // rest-to-rest quintic, s(0)=0, s(1)=1
  const double t3 = tau * tau * tau;
  return t3 * (10.0 + tau * (-15.0 + 6.0 * tau));
}
}  // namespace

void Trajectory::append(Segment s) {
  if (s.duration_s <= 0.0)
    throw ConfigError("trajectory: segment duration must be positive");
  if (s.kind == SegmentKind::kHold) s.delta_mm = 0.0;
  segs_.push_back(s);
  total_ += s.duration_s;
  seg_end_t_.push_back(total_);
  const double prev = seg_end_x_.empty() ? 0.0 : seg_end_x_.back();
  seg_end_x_.push_back(prev + s.delta_mm);
}

Trajectory::Trajectory(std::vector<Segment> segments) {
  for (const Segment& s : segments) append(s);
}

Trajectory& Trajectory::hold(double duration_s) {
  append({SegmentKind::kHold, duration_s, 0.0});
  return *this;
}
Trajectory& Trajectory::constant_velocity(double duration_s, double delta_mm) {
  append({SegmentKind::kConstantVelocity, duration_s, delta_mm});
  return *this;
}
Trajectory& Trajectory::min_jerk(double duration_s, double delta_mm) {
  append({SegmentKind::kMinJerk, duration_s, delta_mm});
  return *this;
}

double Trajectory::net_delta() const {
  return seg_end_x_.empty() ? 0.0 : seg_end_x_.back();
}

double Trajectory::position(double t) const {
  if (segs_.empty() || t <= 0.0) return 0.0;
  if (t >= total_) return seg_end_x_.back();
  size_t i = static_cast<size_t>(
      std::upper_bound(seg_end_t_.begin(), seg_end_t_.end(), t) - seg_end_t_.begin());
  if (i >= segs_.size()) i = segs_.size() - 1;
  const double t0 = (i == 0) ? 0.0 : seg_end_t_[i - 1];
  const double x0 = (i == 0) ? 0.0 : seg_end_x_[i - 1];
  const Segment& s = segs_[i];
  const double tau = (t - t0) / s.duration_s;
  switch (s.kind) {
    case SegmentKind::kHold:
      return x0;
    case SegmentKind::kConstantVelocity:
      return x0 + s.delta_mm * tau;
    case SegmentKind::kMinJerk:
      return x0 + s.delta_mm * minjerk_shape(tau);
  }
  return x0;
}

double range_attenuation(double range_mm) {
  const double r = std::max(range_mm, kAttenuationFloorMm);
  return (kAttenuationFloorMm / r) * (kAttenuationFloorMm / r);
}

void SceneConfig::validate() const {
  for (const Reflector& r : static_reflectors) {
    if (r.range_mm < 0) throw ConfigError("scene: reflector range must be >= 0");
    if (r.gain < 0) throw ConfigError("scene: reflector gain must be >= 0");
  }
  if (finger) {
    if (finger->start_range_mm < 0)
      throw ConfigError("scene: finger start range must be >= 0");
    if (finger->gain < 0) throw ConfigError("scene: finger gain must be >= 0");
    if (finger->trajectory.segments().empty() && duration_s <= 0)
      throw ConfigError("scene: empty finger trajectory needs duration_s");
  }
  if (walker) {
    if (walker->period_s <= 0) throw ConfigError("scene: walker period must be positive");
    if (walker->gain < 0) throw ConfigError("scene: walker gain must be >= 0");
  }
  if (!finger && duration_s <= 0)
    throw ConfigError("scene: duration_s required without a finger");
}

EchoSim synthesize_echo(const SceneConfig& scene, const SonarConfig& cfg) {
  scene.validate();
  cfg.validate();
  double duration = scene.duration_s;
  if (duration <= 0.0) duration = scene.finger->trajectory.duration();
  // whole frames so the tracker can consume everything
  const long long frames = static_cast<long long>(
      std::ceil(duration * cfg.frame_rate() - 1e-9));
  const long long n = frames * cfg.frame_len;
  const double wl = cfg.wavelength_mm();
  const double w = kTwoPi * cfg.carrier_freq / cfg.sample_rate;

  EchoSim out;
  out.audio.assign(static_cast<size_t>(n), 0.0);

  // static reflectors collapse to one cos/sin pair
  double stat_c = 0.0, stat_s = 0.0;
  for (const Reflector& r : scene.static_reflectors) {
    const double ph = -2.0 * kTwoPi * r.range_mm / wl;  // -4*pi*r/lambda
    stat_c += r.gain * std::cos(ph);
    stat_s += r.gain * std::sin(ph);
  }

  std::mt19937_64 rng(scene.seed);
  const double walker_phase0 =
      scene.walker ? std::uniform_real_distribution<double>(0.0, kTwoPi)(rng) : 0.0;

  double sigma = 0.0;
  if (scene.noise_snr_db) {
    double ref = cfg.amplitude;
    if (scene.finger)
      ref = cfg.amplitude * scene.finger->gain *
            range_attenuation(scene.finger->start_range_mm);
    else if (!scene.static_reflectors.empty()) {
      double g = 0.0;
      for (const Reflector& r : scene.static_reflectors) g = std::max(g, r.gain);
      ref = cfg.amplitude * g;
    }
    sigma = ref * std::pow(10.0, -*scene.noise_snr_db / 20.0);
  }
  out.noise_sigma = sigma;
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double a = cfg.amplitude;
  for (long long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / cfg.sample_rate;
    const double th = w * static_cast<double>(i);
    double x = a * (stat_c * std::cos(th) - stat_s * std::sin(th));
    if (scene.finger) {
      const double r = scene.finger->start_range_mm +
                       scene.finger->trajectory.position(t);
      const double gain = scene.finger->gain * range_attenuation(r);
      const double ph = -2.0 * kTwoPi * r / wl;
      x += a * gain * std::cos(th + ph);
    }
    if (scene.walker) {
      const WalkerConfig& wk = *scene.walker;
      const double cyc = kTwoPi * t / wk.period_s + walker_phase0;
      const double r = wk.range_mm + wk.range_swing_mm * std::sin(cyc);
      const double g = wk.gain * (1.0 + wk.am_depth * std::cos(cyc));
      const double ph = -2.0 * kTwoPi * r / wl;
      x += a * g * std::cos(th + ph);
    }
    if (sigma > 0.0) x += sigma * gauss(rng);
    out.audio[static_cast<size_t>(i)] = x;
  }

  const long long nt = static_cast<long long>(
      std::llround(static_cast<double>(n) / cfg.sample_rate * cfg.baseband_rate));
  out.truth.reserve(static_cast<size_t>(nt));
  const double start = scene.finger ? scene.finger->start_range_mm : 0.0;
  for (long long i = 0; i < nt; ++i) {
    const double t = static_cast<double>(i) / cfg.baseband_rate;
    const double r =
        scene.finger ? start + scene.finger->trajectory.position(t) : 0.0;
    out.truth.push_back({t, r});
  }
  return out;
}

void ImuConfig::validate() const {
  if (rate_hz <= 0) throw ConfigError("imu: rate must be positive");
  if (duration_s <= 0) throw ConfigError("imu: duration must be positive");
  if (noise_rms < 0) throw ConfigError("imu: noise_rms must be >= 0");
  if (burst.span_s <= 0 || burst.decay_s <= 0 || burst.peak <= 0 ||
      burst.freq_lo_hz <= 0 || burst.freq_hi_hz < burst.freq_lo_hz)
    throw ConfigError("imu: bad burst parameters");
  for (size_t i = 0; i < pinch_times.size(); ++i) {
    if (pinch_times[i] < 0 || pinch_times[i] > duration_s)
      throw ConfigError("imu: pinch time outside stream");
    if (i > 0 && pinch_times[i] - pinch_times[i - 1] <= 0.2)
      throw ConfigError("imu: pinch bursts overlap (gaps must exceed 0.2 s)");
  }
}

ImuStream synthesize_imu(const ImuConfig& cfg) {
  cfg.validate();
  ImuStream out;
  out.rate_hz = cfg.rate_hz;
  const size_t n = static_cast<size_t>(std::ceil(cfg.duration_s * cfg.rate_hz));
  out.samples.assign(n, {0.0, 0.0, 0.0});

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> freq(cfg.burst.freq_lo_hz, cfg.burst.freq_hi_hz);
  std::uniform_int_distribution<int> axis_pick(0, 2);
  for (double t0 : cfg.pinch_times) {
    const double f = freq(rng);
    const int axis = axis_pick(rng);
    const size_t i0 = static_cast<size_t>(std::ceil(t0 * cfg.rate_hz - 1e-12));
    for (size_t i = i0; i < n; ++i) {
      const double dt = static_cast<double>(i) / cfg.rate_hz - t0;
      if (dt > cfg.burst.span_s) break;
      out.samples[i][static_cast<size_t>(axis)] +=
          cfg.burst.peak * std::exp(-dt / cfg.burst.decay_s) * std::sin(kTwoPi * f * dt);
    }
  }
  if (cfg.noise_rms > 0.0) {
    std::normal_distribution<double> gauss(0.0, cfg.noise_rms);
    for (size_t i = 0; i < n; ++i)
      for (int ax = 0; ax < 3; ++ax) out.samples[i][static_cast<size_t>(ax)] += gauss(rng);
  }
  return out;
}

std::vector<StageTrial> linear_stage_protocol(const StageProtocolConfig& cfg) {
  if (cfg.reps <= 0 || cfg.move_mm <= 0 || cfg.hold_s <= 0)
    throw ConfigError("stage protocol: reps, move_mm, hold_s must be positive");
  std::vector<StageTrial> out;
  std::uint64_t idx = 0;
  for (double lo : cfg.range_lo_mm)
    for (double v : cfg.speeds_mm_s)
      for (int noise = 0; noise < 2; ++noise)
        for (int rep = 0; rep < cfg.reps; ++rep) {
          StageTrial t;
          t.range_lo_mm = lo;
          t.speed_mm_s = v;
          t.noise_on = noise == 1;
          t.rep = rep;
          t.downward = (rep % 2) == 1;
          SceneConfig s;
          s.static_reflectors = cfg.static_reflectors;
          FingerConfig f;
          f.gain = cfg.finger_gain;
          f.start_range_mm = t.downward ? lo + cfg.move_mm : lo;
          const double dir = t.downward ? -1.0 : 1.0;
          f.trajectory.hold(cfg.hold_s)
              .constant_velocity(cfg.move_mm / v, dir * cfg.move_mm)
              .hold(cfg.hold_s);
          s.finger = f;
          s.noise_snr_db = t.noise_on ? cfg.noisy_snr_db : cfg.clean_snr_db;
          if (t.noise_on) s.walker = cfg.walker;
          s.seed = cfg.seed * 1000003ULL + idx;
          t.scene = s;
          out.push_back(std::move(t));
          ++idx;
        }
  return out;
}

namespace {

using nlohmann::json;

json trajectory_to_json(const Trajectory& tr) {
  json arr = json::array();
  for (const Segment& s : tr.segments()) {
    const char* kind = s.kind == SegmentKind::kHold ? "hold"
                       : s.kind == SegmentKind::kConstantVelocity
                           ? "constant_velocity"
                           : "min_jerk";
    json seg = {{"kind", kind}, {"duration_s", s.duration_s}};
    if (s.kind != SegmentKind::kHold) seg["delta_mm"] = s.delta_mm;
    arr.push_back(seg);
  }
  return arr;
}

Trajectory trajectory_from_json(const json& arr) {
  if (!arr.is_array()) throw ConfigError("scene: trajectory must be an array");
  Trajectory tr;
  for (const json& seg : arr) {
    const std::string kind = seg.at("kind").get<std::string>();
    const double dur = seg.at("duration_s").get<double>();
    if (kind == "hold")
      tr.hold(dur);
    else if (kind == "constant_velocity")
      tr.constant_velocity(dur, seg.at("delta_mm").get<double>());
    else if (kind == "min_jerk")
      tr.min_jerk(dur, seg.at("delta_mm").get<double>());
    else
      throw ConfigError("scene: unknown segment kind '" + kind + "'");
  }
  return tr;
}

}  // namespace

SceneConfig parse_scene_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scene: invalid JSON: ") + e.what());
  }
  try {
    SceneConfig s;
    if (j.contains("static_reflectors")) {
      s.static_reflectors.clear();
      for (const json& r : j.at("static_reflectors"))
        s.static_reflectors.push_back(
            {r.at("range_mm").get<double>(), r.at("gain").get<double>()});
    }
    if (j.contains("finger") && !j.at("finger").is_null()) {
      const json& f = j.at("finger");
      FingerConfig fc;
      if (f.contains("start_range_mm")) fc.start_range_mm = f.at("start_range_mm").get<double>();
      if (f.contains("gain")) fc.gain = f.at("gain").get<double>();
      if (f.contains("trajectory")) fc.trajectory = trajectory_from_json(f.at("trajectory"));
      s.finger = fc;
    }
    if (j.contains("noise_snr_db") && !j.at("noise_snr_db").is_null())
      s.noise_snr_db = j.at("noise_snr_db").get<double>();
    if (j.contains("walker") && !j.at("walker").is_null()) {
      const json& w = j.at("walker");
      WalkerConfig wc;
      if (w.contains("period_s")) wc.period_s = w.at("period_s").get<double>();
      if (w.contains("gain")) wc.gain = w.at("gain").get<double>();
      if (w.contains("range_mm")) wc.range_mm = w.at("range_mm").get<double>();
      if (w.contains("range_swing_mm")) wc.range_swing_mm = w.at("range_swing_mm").get<double>();
      if (w.contains("am_depth")) wc.am_depth = w.at("am_depth").get<double>();
      s.walker = wc;
    }
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("duration_s")) s.duration_s = j.at("duration_s").get<double>();
    s.validate();
    return s;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
}

std::string scene_to_json(const SceneConfig& scene) {
  json j;
  j["schema_version"] = 1;
  json refl = json::array();
  for (const Reflector& r : scene.static_reflectors)
    refl.push_back({{"range_mm", r.range_mm}, {"gain", r.gain}});
  j["static_reflectors"] = refl;
  if (scene.finger) {
    j["finger"] = {{"start_range_mm", scene.finger->start_range_mm},
                   {"gain", scene.finger->gain},
                   {"trajectory", trajectory_to_json(scene.finger->trajectory)}};
  }
  if (scene.noise_snr_db) j["noise_snr_db"] = *scene.noise_snr_db;
  if (scene.walker)
    j["walker"] = {{"period_s", scene.walker->period_s},
                   {"gain", scene.walker->gain},
                   {"range_mm", scene.walker->range_mm},
                   {"range_swing_mm", scene.walker->range_swing_mm},
                   {"am_depth", scene.walker->am_depth}};
  j["seed"] = scene.seed;
  j["duration_s"] = scene.duration_s;
  return j.dump(2);
}

}  // namespace sonar
