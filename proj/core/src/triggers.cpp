#include "sonarcursor/triggers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sonar {

void validate_targets(std::span<const Target> targets) {
  std::vector<size_t> order(targets.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return targets[a].center_mm < targets[b].center_mm;
  });
  for (size_t i = 0; i < order.size(); ++i) {
    const Target& t = targets[order[i]];
    if (t.width_mm <= 0) throw ConfigError("targets: width must be positive");
    if (i > 0) {
      const Target& p = targets[order[i - 1]];
      if (t.left() < p.right() - 1e-12)
        throw ConfigError("targets: overlapping targets");
    }
    for (size_t j = i + 1; j < order.size(); ++j)
      if (targets[order[j]].id == t.id)
        throw ConfigError("targets: duplicate target id");
  }
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::kEnter: return "enter";
    case EventKind::kExit: return "exit";
    case EventKind::kSelect: return "select";
    case EventKind::kCancel: return "cancel";
    case EventKind::kErrorSelect: return "error_select";
    case EventKind::kHapticPulse: return "haptic_pulse";
  }
  return "?";
}

const char* to_string(Method m) {
  switch (m) {
    case Method::kDoubleCrossing: return "double_crossing";
    case Method::kDwell: return "dwell";
    case Method::kPinch: return "pinch";
  }
  return "?";
}

DoubleCrossingTrigger::DoubleCrossingTrigger(std::vector<Target> targets)
    : targets_(std::move(targets)) {
  validate_targets(targets_);
}

void DoubleCrossingTrigger::reset() {
  cand_.reset();
  seen_ = 0;
  p1_ = p2_ = 0.0;
}

std::optional<size_t> DoubleCrossingTrigger::target_at(double x) const {
  for (size_t i = 0; i < targets_.size(); ++i)
    if (targets_[i].contains(x)) return i;
  return std::nullopt;
}

std::vector<TriggerEvent> DoubleCrossingTrigger::step(
    const CursorState& cursor, std::optional<int> highlighted) {
  const double x = cursor.position_mm;
  const double t = cursor.time_s;
  std::vector<TriggerEvent> ev;
  auto emit = [&](EventKind k, double coord, std::optional<int> tid) {
    ev.push_back({k, Method::kDoubleCrossing, t, coord, tid, std::nullopt});
  };

  if (seen_ == 0) {
    p1_ = p2_ = x;
    seen_ = 1;
    if (auto ti = target_at(x)) {
      cand_ = Candidate{*ti, 0, std::nullopt};  // spawned inside: edge unknown
      emit(EventKind::kEnter, x, targets_[*ti].id);
    }
    return ev;
  }

  // Reversal detection on the raw sample triple (p1_, p2_, x): p2_ is the
  // interior extremum; its parabolic vertex is the selection coordinate.
  if (cand_ && !cand_->vertex && seen_ >= 2 &&
      targets_[cand_->target].contains(p2_)) {
    const double denom = p1_ - 2.0 * p2_ + x;
    const bool is_max = (p2_ >= p1_ && p2_ > x) || (p2_ > p1_ && p2_ >= x);
    const bool is_min = (p2_ <= p1_ && p2_ < x) || (p2_ < p1_ && p2_ <= x);
    const bool want_max = cand_->entry_edge == -1;  // entered leftward edge
    const bool want_min = cand_->entry_edge == +1;
    if (std::abs(denom) > 1e-12 &&
        ((want_max && is_max) || (want_min && is_min) ||
         (cand_->entry_edge == 0 && (is_max || is_min)))) {
      cand_->vertex = p2_ - (p1_ - x) * (p1_ - x) / (8.0 * denom);
    }
  }

  // Walk the segment p2_ -> x through every boundary it crosses, in order.
  const double a = p2_, b = x;
  std::vector<double> cuts;
  if (a != b) {
    for (const Target& tg : targets_)
      for (double c : {tg.left(), tg.right()}) {
        const double s = (c - a) / (b - a);
        if (s > 0.0 && s <= 1.0) cuts.push_back(s);
      }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  }
  std::optional<size_t> state = cand_ ? std::optional<size_t>(cand_->target)
                                      : std::nullopt;
  for (size_t j = 0; j <= cuts.size(); ++j) {
    const bool last = j == cuts.size();
    double probe;
    if (last) {
      probe = b;
    } else {
      const double s_hi = (j + 1 < cuts.size()) ? cuts[j + 1] : 1.0;
      probe = a + (b - a) * 0.5 * (cuts[j] + s_hi);
    }
    std::optional<size_t> next = target_at(probe);
    if (j == 0 && cuts.empty()) next = target_at(b);
    if (next == state) continue;
    const double c = last && cuts.empty() ? b : a + (b - a) * cuts[std::min(j, cuts.size() - 1)];
    if (state) {
      const Target& tg = targets_[*state];
      const int edge = std::abs(c - tg.left()) <= std::abs(c - tg.right()) ? -1 : +1;
      emit(EventKind::kExit, c, tg.id);
      if (cand_ && cand_->target == *state) {
        if (cand_->entry_edge != 0 && edge == cand_->entry_edge) {
          const double coord = cand_->vertex.value_or(p2_);
          const bool hit = highlighted && tg.id == *highlighted;
          emit(hit ? EventKind::kSelect : EventKind::kErrorSelect, coord, tg.id);
        } else {
          emit(EventKind::kCancel, c, tg.id);
        }
        cand_.reset();
      }
    }
    if (next) {
      const Target& tg = targets_[*next];
      const int edge = std::abs(c - tg.left()) <= std::abs(c - tg.right()) ? -1 : +1;
      emit(EventKind::kEnter, c, tg.id);
      cand_ = Candidate{*next, edge, std::nullopt};
    }
    state = next;
  }

  p1_ = p2_;
  p2_ = x;
  ++seen_;
  return ev;
}

DwellTrigger::DwellTrigger(std::vector<Target> targets, double dwell_ms)
    : targets_(std::move(targets)), dwell_s_(dwell_ms / 1000.0) {
  validate_targets(targets_);
  if (dwell_ms <= 0) throw ConfigError("dwell: dwell_ms must be positive");
}

void DwellTrigger::reset() {
  cur_high_.reset();
  inside_ = false;
  enter_t_ = 0.0;
}

const Target* DwellTrigger::find(int id) const {
  for (const Target& t : targets_)
    if (t.id == id) return &t;
  return nullptr;
}

std::vector<TriggerEvent> DwellTrigger::step(const CursorState& cursor,
                                             std::optional<int> highlighted) {
  const double x = cursor.position_mm;
  const double t = cursor.time_s;
  std::vector<TriggerEvent> ev;
  if (cur_high_ != highlighted) {  // highlight moved: timer restarts silently
    cur_high_ = highlighted;
    inside_ = false;
  }
  const Target* tg = highlighted ? find(*highlighted) : nullptr;
  const bool in = tg && tg->contains(x);
  if (in && !inside_) {
    inside_ = true;
    enter_t_ = t;
    ev.push_back({EventKind::kEnter, Method::kDwell, t, x, tg->id, std::nullopt});
  } else if (!in && inside_) {
    inside_ = false;
    ev.push_back({EventKind::kExit, Method::kDwell, t, x,
                  tg ? std::optional<int>(tg->id) : std::nullopt, std::nullopt});
  }
  if (in && t - enter_t_ >= dwell_s_ - 1e-9) {
    ev.push_back({EventKind::kSelect, Method::kDwell, t, x, tg->id, std::nullopt});
    enter_t_ = t;  // re-arm so a continued stay can select again
  }
  return ev;
}

double PinchDetector::Biquad::step(double x) {
  const double y = b0 * x + z1;
  z1 = b1 * x - a1 * y + z2;
  z2 = b2 * x - a2 * y;
  return y;
}

PinchDetector::PinchDetector(const PinchDetectorConfig& cfg) : cfg_(cfg) {
  if (cfg_.rate_hz <= 0 || cfg_.highpass_hz <= 0 ||
      cfg_.highpass_hz >= cfg_.rate_hz / 2)
    throw ConfigError("pinch detector: need 0 < highpass < Nyquist");
  if (cfg_.threshold <= 0) throw ConfigError("pinch detector: threshold must be positive");
  const double k = std::tan(std::numbers::pi * cfg_.highpass_hz / cfg_.rate_hz);
  const double q = std::numbers::sqrt2 / 2.0;
  const double norm = 1.0 / (1.0 + k / q + k * k);
  for (Biquad& b : hp_) {
    b.b0 = norm;
    b.b1 = -2.0 * norm;
    b.b2 = norm;
    b.a1 = 2.0 * (k * k - 1.0) * norm;
    b.a2 = (1.0 - k / q + k * k) * norm;
    b.z1 = b.z2 = 0.0;
  }
  last_detect_ = -1.0;
}

void PinchDetector::reset() {
  for (Biquad& b : hp_) b.z1 = b.z2 = 0.0;
  last_detect_ = -1.0;
}

std::optional<double> PinchDetector::push(const std::array<double, 3>& accel,
                                          double t) {
  double mag2 = 0.0;
  for (int ax = 0; ax < 3; ++ax) {
    const double f = hp_[ax].step(accel[static_cast<size_t>(ax)]);
    mag2 += f * f;
  }
  if (std::sqrt(mag2) >= cfg_.threshold) {
    if (last_detect_ < 0.0 || t - last_detect_ > cfg_.refractory_s) {
      last_detect_ = t;
      return t;
    }
  }
  return std::nullopt;
}

std::vector<double> PinchDetector::detect(const ImuStream& imu) {
  std::vector<double> out;
  for (size_t i = 0; i < imu.samples.size(); ++i)
    if (auto t = push(imu.samples[i], imu.time_at(i))) out.push_back(*t);
  return out;
}

PinchTrigger::PinchTrigger(std::vector<Target> targets, double offset_ms,
                           double history_s)
    : targets_(std::move(targets)),
      offset_s_(offset_ms / 1000.0),
      history_s_(history_s) {
  validate_targets(targets_);
  if (offset_ms < 0) throw ConfigError("pinch trigger: offset must be >= 0");
  if (history_s_ <= offset_s_)
    throw ConfigError("pinch trigger: history shorter than offset");
}

void PinchTrigger::reset() {
  hist_.clear();
  inside_.reset();
}

std::optional<size_t> PinchTrigger::target_at(double x) const {
  for (size_t i = 0; i < targets_.size(); ++i)
    if (targets_[i].contains(x)) return i;
  return std::nullopt;
}

std::vector<TriggerEvent> PinchTrigger::step(const CursorState& cursor,
                                             std::optional<int> highlighted) {
  (void)highlighted;
  const double x = cursor.position_mm;
  const double t = cursor.time_s;
  hist_.emplace_back(t, x);
  while (hist_.size() > 2 && hist_.front().first < t - history_s_) hist_.pop_front();
  std::vector<TriggerEvent> ev;
  const std::optional<size_t> now = target_at(x);
  if (now != inside_) {
    if (inside_)
      ev.push_back({EventKind::kExit, Method::kPinch, t, x,
                    targets_[*inside_].id, std::nullopt});
    if (now)
      ev.push_back({EventKind::kEnter, Method::kPinch, t, x, targets_[*now].id,
                    std::nullopt});
    inside_ = now;
  }
  return ev;
}

std::vector<TriggerEvent> PinchTrigger::pinch(double t,
                                              std::optional<int> highlighted) {
  if (hist_.empty())
    throw ContractViolation("pinch trigger: no cursor history");
  const double tq = t - offset_s_;
  if (tq < hist_.front().first - 1e-9)
    throw ContractViolation("pinch trigger: offset reaches past cursor history");
  double coord = hist_.back().second;
  if (tq < hist_.back().first) {
    for (size_t i = hist_.size() - 1; i > 0; --i) {
      if (hist_[i - 1].first <= tq) {
        const auto& [t0, x0] = hist_[i - 1];
        const auto& [t1, x1] = hist_[i];
        coord = t1 > t0 ? x0 + (x1 - x0) * (tq - t0) / (t1 - t0) : x1;
        break;
      }
    }
  }
  const std::optional<size_t> ti = target_at(coord);
  const bool hit = ti && highlighted && targets_[*ti].id == *highlighted;
  std::vector<TriggerEvent> ev;
  ev.push_back({hit ? EventKind::kSelect : EventKind::kErrorSelect,
                Method::kPinch, t, coord,
                ti ? std::optional<int>(targets_[*ti].id) : std::nullopt,
                std::nullopt});
  return ev;
}

std::vector<TriggerEvent> apply_haptics(const std::vector<TriggerEvent>& events,
                                        const HapticsConfig& cfg) {
  if (!cfg.enabled) return events;
  std::vector<TriggerEvent> out;
  out.reserve(events.size() * 2);
  for (const TriggerEvent& e : events) {
    out.push_back(e);
    if (e.kind == EventKind::kEnter) {
      TriggerEvent h = e;
      h.kind = EventKind::kHapticPulse;
      h.haptic = HapticPulse{cfg.enter_ms, cfg.enter_intensity};
      out.push_back(h);
    } else if (e.kind == EventKind::kSelect || e.kind == EventKind::kErrorSelect) {
      TriggerEvent h = e;
      h.kind = EventKind::kHapticPulse;
      h.haptic = HapticPulse{cfg.select_ms, cfg.select_intensity};
      out.push_back(h);
    }
  }
  return out;
}

}  // namespace sonar
