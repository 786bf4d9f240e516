#include "sonarcursor/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sonar {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr size_t kExtremaRing = 16;

double wrap_pi(double d) {
  while (d > kPi) d -= 2.0 * kPi;
  while (d <= -kPi) d += 2.0 * kPi;
  return d;
}
}  // namespace

LevdFilter::LevdFilter(const LevdConfig& cfg) : cfg_(cfg) {
  if (cfg_.pp_threshold <= 0) throw ConfigError("levd: pp_threshold must be positive");
  if (cfg_.max_hold_s <= 0) throw ConfigError("levd: max_hold_s must be positive");
}

void LevdFilter::feed_channel(int ch, double x, double t) {
  Channel& c = chan_[ch];
  const double h = cfg_.hysteresis_frac * cfg_.pp_threshold;
  if (!c.seeded) {
    c.seeded = true;
    c.cand_max = c.cand_min = x;
    c.t_max = c.t_min = t;
    return;
  }
  if (c.dir >= 0) {
    if (x > c.cand_max) {
      c.cand_max = x;
      c.t_max = t;
    } else if (c.cand_max - x > h) {
      // committed local max
      recent_.push_back({ch, true, c.cand_max, c.t_max});
      if (recent_.size() > kExtremaRing) recent_.pop_front();
      if (c.has_min && c.cand_max - c.last_min >= cfg_.pp_threshold) {
        est_[ch] = 0.5 * (c.cand_max + c.last_min);
        c.refreshed = true;
        any_refresh_ = true;
        last_refresh_ = t;
      }
      c.last_max = c.cand_max;
      c.has_max = true;
      c.dir = -1;
      c.cand_min = x;
      c.t_min = t;
    }
  } else {
    if (x < c.cand_min) {
      c.cand_min = x;
      c.t_min = t;
    } else if (x - c.cand_min > h) {
      recent_.push_back({ch, false, c.cand_min, c.t_min});
      if (recent_.size() > kExtremaRing) recent_.pop_front();
      if (c.has_max && c.last_max - c.cand_min >= cfg_.pp_threshold) {
        est_[ch] = 0.5 * (c.last_max + c.cand_min);
        c.refreshed = true;
        any_refresh_ = true;
        last_refresh_ = t;
      }
      c.last_min = c.cand_min;
      c.has_min = true;
      c.dir = 1;
      c.cand_max = x;
      c.t_max = t;
    }
  }
}

std::complex<double> LevdFilter::push(std::complex<double> sample, double time) {
  const double v[2] = {sample.real(), sample.imag()};
  for (int ch = 0; ch < 2; ++ch) {
    Channel& c = chan_[ch];
    if (!c.refreshed) {
      // bootstrap: running mean until the first extrema pair lands
      c.mean_acc += v[ch];
      c.mean_n += 1;
      est_[ch] = c.mean_acc / static_cast<double>(c.mean_n);
    }
    feed_channel(ch, v[ch], time);
  }
  if (!any_refresh_) last_refresh_ = time;  // bootstrap counts as fresh
  return sample - static_estimate();
}

bool LevdFilter::stale(double now) const {
  return now - last_refresh_ > cfg_.max_hold_s;
}

PhaseUnwrapper::PhaseUnwrapper(double wavelength_mm, double gate)
    : wl_(wavelength_mm), gate_(gate) {}

void PhaseUnwrapper::seed(double unwrapped, double last_wrapped, bool primed) {
  u_ = unwrapped;
  last_w_ = last_wrapped;
  primed_ = primed;
}

double PhaseUnwrapper::push(std::complex<double> dynamic) {
  if (std::abs(dynamic) < gate_) {
    primed_ = false;  // hold; next valid sample re-anchors without a jump
    return displacement_mm();
  }
  const double w = std::atan2(dynamic.imag(), dynamic.real());
  if (primed_) u_ += wrap_pi(w - last_w_);
  last_w_ = w;
  primed_ = true;
  return displacement_mm();
}

double PhaseUnwrapper::displacement_mm() const {
  return -u_ * wl_ / (4.0 * kPi);
}

OneEuroFilter::OneEuroFilter(const OneEuroConfig& cfg) : cfg_(cfg) {
  if (cfg_.min_cutoff <= 0 || cfg_.d_cutoff <= 0)
    throw ConfigError("one-euro: cutoffs must be positive");
}

void OneEuroFilter::reset() {
  primed_ = false;
  x_hat_ = dx_hat_ = prev_x_ = last_t_ = 0.0;
}

namespace {
double ema_alpha(double cutoff_hz, double dt) {
  const double tau = 1.0 / (2.0 * kPi * cutoff_hz);
  return 1.0 / (1.0 + tau / dt);
}
}  // namespace

double OneEuroFilter::filter(double x, double t) {
  if (primed_ && t <= last_t_)
    throw ContractViolation("one-euro: timestamps must strictly increase");
  if (!primed_) {
    primed_ = true;
    x_hat_ = x;
    prev_x_ = x;
    dx_hat_ = 0.0;
    last_t_ = t;
    return x_hat_;
  }
  const double dt = t - last_t_;
  last_t_ = t;
  const double dx = (x - prev_x_) / dt;
  prev_x_ = x;
  const double ad = ema_alpha(cfg_.d_cutoff, dt);
  dx_hat_ += ad * (dx - dx_hat_);
  const double cutoff = cfg_.min_cutoff + cfg_.beta * std::abs(dx_hat_);
  const double a = ema_alpha(cutoff, dt);
  x_hat_ += a * (x - x_hat_);
  return x_hat_;
}

Tracker::Tracker(const TrackerConfig& cfg)
    : cfg_(cfg), demod_(cfg.sonar), levd_(cfg.levd), euro_(cfg.euro) {
  cfg_.sonar.validate();
  if (cfg_.window_s <= 0) throw ConfigError("tracker: window_s must be positive");
  win_cap_ = static_cast<size_t>(cfg_.window_s * cfg_.sonar.baseband_rate);
  if (win_cap_ < 4) win_cap_ = 4;
  skip_ = demod_.warmup_baseband_samples();
}

CursorState Tracker::process(const AudioFrame& frame) {
  BasebandFrame bb = demod_.process(frame);
  const double dt_bb = 1.0 / bb.rate;
  constexpr size_t kNone = static_cast<size_t>(-1);
  size_t frame_begin = kNone;  // window index of this frame's first kept sample
  for (size_t i = 0; i < bb.samples.size(); ++i) {
    if (skip_ > 0) {
      --skip_;
      continue;
    }
    if (frame_begin == kNone) frame_begin = win_.size();
    const double t = bb.start_time + static_cast<double>(i) * dt_bb;
    levd_.push(bb.samples[i], t);
    win_.push_back(bb.samples[i]);
    win_t_.push_back(t);
  }
  if (frame_begin == kNone) frame_begin = win_.size();

  // Evict beyond the horizon; the anchor takes the evicted samples' state
  // from the previous recompute.
  while (win_.size() > win_cap_) {
    if (!u_.empty()) {
      anchor_u_ = u_.front();
      anchor_lastw_ = lastw_.front();
      anchor_primed_ = primed_.front() != 0;
      u_.erase(u_.begin());
      lastw_.erase(lastw_.begin());
      primed_.erase(primed_.begin());
    }
    win_.pop_front();
    win_t_.pop_front();
    if (frame_begin > 0) --frame_begin;
  }

  // Re-derive the window's unwrapped phase with the current static estimate.
  const std::complex<double> st = levd_.static_estimate();
  const double gate = cfg_.gate_frac * cfg_.levd.pp_threshold;
  PhaseUnwrapper un(cfg_.sonar.wavelength_mm(), gate);
  un.seed(anchor_u_, anchor_lastw_, anchor_primed_);
  u_.assign(win_.size(), 0.0);
  lastw_.assign(win_.size(), 0.0);
  primed_.assign(win_.size(), 0);
  double qual_acc = 0.0;
  size_t qual_n = 0;
  for (size_t i = 0; i < win_.size(); ++i) {
    const std::complex<double> dyn = win_[i] - st;
    un.push(dyn);
    u_[i] = un.unwrapped();
    lastw_[i] = un.last_wrapped();
    primed_[i] = un.primed() ? 1 : 0;
    if (i >= frame_begin) {
      qual_acc += std::abs(dyn);
      ++qual_n;
    }
  }
  if (!win_.empty()) {
    raw_disp_ = -u_.back() * cfg_.sonar.wavelength_mm() / (4.0 * kPi);
    last_time_ = win_t_.back();
    have_time_ = true;
  } else {
    last_time_ = frame.start_time + cfg_.sonar.frame_dt();
  }

  CursorState cs;
  cs.time_s = last_time_;
  cs.position_mm = euro_.filter(raw_disp_, cs.time_s);
  cs.velocity_mm_s = euro_.velocity();
  double q = 0.0;
  if (qual_n > 0)
    q = std::clamp(qual_acc / static_cast<double>(qual_n) / cfg_.levd.pp_threshold,
                   0.0, 1.0);
  if (levd_.stale(cs.time_s)) q *= 0.5;
  cs.quality = q;
  return cs;
}

std::vector<std::pair<double, double>> Tracker::window_track() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(win_.size());
  const double k = -cfg_.sonar.wavelength_mm() / (4.0 * kPi);
  for (size_t i = 0; i < win_.size(); ++i) out.emplace_back(win_t_[i], k * u_[i]);
  return out;
}

}  // namespace sonar
