#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "sonarcursor/simulate.hpp"
#include "sonarcursor/triggers.hpp"

using namespace sonar;

namespace {

CursorState frame(double t, double x) {
  CursorState c;
  c.time_s = t;
  c.position_mm = x;
  c.quality = 1.0;
  return c;
}

std::vector<EventKind> kinds(const std::vector<TriggerEvent>& ev) {
  std::vector<EventKind> out;
  for (const TriggerEvent& e : ev) out.push_back(e.kind);
  return out;
}

}  // namespace

TEST_CASE("target geometry and validation") {
  Target t{3, 10.0, 6.0};
  CHECK(t.left() == doctest::Approx(7.0));
  CHECK(t.right() == doctest::Approx(13.0));
  CHECK(t.contains(7.0));
  CHECK(t.contains(13.0));
  CHECK(!t.contains(13.01));

  CHECK_NOTHROW(validate_targets(std::vector<Target>{{0, 0.0, 6.0}, {1, 12.0, 6.0}}));
  CHECK_THROWS_AS(validate_targets(std::vector<Target>{{0, 0.0, 6.0}, {1, 5.0, 6.0}}),
                  ConfigError);  // overlap
  CHECK_THROWS_AS(validate_targets(std::vector<Target>{{0, 0.0, 0.0}}), ConfigError);
  CHECK_THROWS_AS(validate_targets(std::vector<Target>{{2, 0.0, 6.0}, {2, 12.0, 6.0}}),
                  ConfigError);  // duplicate id
}

TEST_CASE("double-crossing: same-edge exit selects at the parabolic vertex") {
  DoubleCrossingTrigger dc({{7, 0.0, 6.0}});  // target [-3, 3]
  const double dt = 0.04;
  auto ev0 = dc.step(frame(0 * dt, -5.0), 7);
  CHECK(ev0.empty());
  auto ev1 = dc.step(frame(1 * dt, -1.0), 7);  // crosses the left edge
  REQUIRE(ev1.size() == 1);
  CHECK(ev1[0].kind == EventKind::kEnter);
  CHECK(ev1[0].coordinate_mm == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(ev1[0].target_id == 7);
  CHECK(dc.step(frame(2 * dt, 2.0), 7).empty());
  CHECK(dc.step(frame(3 * dt, 1.5), 7).empty());  // reversal sample triple (-1, 2, 1.5)
  auto ev4 = dc.step(frame(4 * dt, -4.0), 7);     // exits across the entry edge
  REQUIRE(ev4.size() == 2);
  CHECK(ev4[0].kind == EventKind::kExit);
  CHECK(ev4[1].kind == EventKind::kSelect);
  // vertex of the parabola through (-1, 2, 1.5): 2 + 6.25/28
  CHECK(ev4[1].coordinate_mm == doctest::Approx(2.22321428571429).epsilon(1e-12));
  CHECK(ev4[1].target_id == 7);
  CHECK(ev4[1].time_s == doctest::Approx(4 * dt));
}

TEST_CASE("double-crossing: opposite-edge exit cancels") {
  DoubleCrossingTrigger dc({{1, 0.0, 6.0}});
  dc.step(frame(0.00, -5.0), 1);
  auto e1 = dc.step(frame(0.04, 0.0), 1);
  REQUIRE(kinds(e1) == std::vector<EventKind>{EventKind::kEnter});
  auto e2 = dc.step(frame(0.08, 5.0), 1);  // out the other side
  REQUIRE(e2.size() == 2);
  CHECK(e2[0].kind == EventKind::kExit);
  CHECK(e2[0].coordinate_mm == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(e2[1].kind == EventKind::kCancel);
}

TEST_CASE("double-crossing: selecting a non-highlighted target is an error") {
  DoubleCrossingTrigger dc({{1, 0.0, 6.0}, {2, 12.0, 6.0}});
  dc.step(frame(0.00, -5.0), 2);
  dc.step(frame(0.04, -1.0), 2);
  dc.step(frame(0.08, 1.0), 2);
  dc.step(frame(0.12, 0.0), 2);
  auto ev = dc.step(frame(0.16, -4.0), 2);
  REQUIRE(ev.size() == 2);
  CHECK(ev[1].kind == EventKind::kErrorSelect);
  CHECK(ev[1].target_id == 1);
}

TEST_CASE("double-crossing: single-frame pass-through is enter then cancel") {
  DoubleCrossingTrigger dc({{1, 0.0, 6.0}});
  dc.step(frame(0.00, -8.0), 1);
  auto ev = dc.step(frame(0.04, 8.0), 1);
  REQUIRE(ev.size() == 3);
  CHECK(ev[0].kind == EventKind::kEnter);
  CHECK(ev[0].coordinate_mm == doctest::Approx(-3.0).epsilon(1e-9));
  CHECK(ev[1].kind == EventKind::kExit);
  CHECK(ev[1].coordinate_mm == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(ev[2].kind == EventKind::kCancel);
}

// Exhaustive small-trace proof: over every cursor stream from a 5-position
// alphabet, (a) a select or error_select happens exactly on same-edge exits,
// (b) every entry resolves to exactly one terminal event (select, error_select
// or cancel) before the next entry, (c) re-entries before a selection are
// impossible, i.e. the method's target re-entry count is identically zero.
TEST_CASE("double-crossing: exhaustive trace proof") {
  const std::vector<double> alphabet = {-8.0, -1.5, 0.0, 1.5, 8.0};
  const int len = 7;
  long long streams = 0, selects = 0, cancels = 0;
  std::vector<int> digits(len, 0);
  auto edge_of = [](double coord) {
    const double dl = std::abs(coord - (-3.0));
    const double dr = std::abs(coord - 3.0);
    CHECK((dl < 1e-9 || dr < 1e-9));  // events always land on an edge
    return dl <= dr ? -1 : +1;
  };
  for (;;) {
    DoubleCrossingTrigger dc({{0, 0.0, 6.0}});
    int open_entry_edge = 0;           // 0 = no candidate
    bool open_via_edge_known = false;  // false while spawned-inside
    int last_exit_edge = 0;
    int enters_since_terminal = 0;
    for (int i = 0; i < len; ++i) {
      const double x = alphabet[static_cast<size_t>(digits[static_cast<size_t>(i)])];
      for (const TriggerEvent& e : dc.step(frame(i * 0.04, x), 0)) {
        switch (e.kind) {
          case EventKind::kEnter:
            ++enters_since_terminal;
            CHECK(enters_since_terminal == 1);  // no nested/repeated entries
            open_via_edge_known = std::abs(std::abs(e.coordinate_mm) - 3.0) < 1e-9;
            open_entry_edge = open_via_edge_known ? edge_of(e.coordinate_mm) : 0;
            break;
          case EventKind::kExit:
            last_exit_edge = edge_of(e.coordinate_mm);
            break;
          case EventKind::kSelect:
          case EventKind::kErrorSelect:
            ++selects;
            CHECK(open_via_edge_known);                // spawned-inside never selects
            CHECK(last_exit_edge == open_entry_edge);  // same-edge rule
            CHECK(enters_since_terminal == 1);         // TRE identically zero
            enters_since_terminal = 0;
            break;
          case EventKind::kCancel:
            ++cancels;
            // opposite-edge and spawned-inside paths must cancel, so any
            // edge-entered candidate reaching here exited the far side
            if (open_via_edge_known) CHECK(last_exit_edge != open_entry_edge);
            enters_since_terminal = 0;
            break;
          case EventKind::kHapticPulse:
            FAIL("no haptics in a bare trigger");
            break;
        }
      }
    }
    ++streams;
    // advance the odometer
    int pos = len - 1;
    while (pos >= 0 && ++digits[static_cast<size_t>(pos)] == 5) {
      digits[static_cast<size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  CHECK(streams == 78125);  // 5^7
  CHECK(selects > 1000);    // the grammar actually exercises selections
  CHECK(cancels > 1000);
}

TEST_CASE("dwell: 499 ms is short, 500 ms selects") {
  {
    DwellTrigger dw({{0, 0.0, 6.0}});
    CHECK(kinds(dw.step(frame(0.0, 1.0), 0)) == std::vector<EventKind>{EventKind::kEnter});
    CHECK(dw.step(frame(0.499, 1.0), 0).empty());
  }
  {
    DwellTrigger dw({{0, 0.0, 6.0}});
    dw.step(frame(0.0, 1.0), 0);
    auto ev = dw.step(frame(0.5, 1.2), 0);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].kind == EventKind::kSelect);
    CHECK(ev[0].coordinate_mm == doctest::Approx(1.2));  // held position at expiry
    CHECK(ev[0].time_s == doctest::Approx(0.5));
  }
}

TEST_CASE("dwell: exit restarts the timer; continued stay re-arms") {
  DwellTrigger dw({{0, 0.0, 6.0}});
  dw.step(frame(0.0, 0.0), 0);
  CHECK(kinds(dw.step(frame(0.3, 9.0), 0)) == std::vector<EventKind>{EventKind::kExit});
  CHECK(kinds(dw.step(frame(0.4, 0.5), 0)) == std::vector<EventKind>{EventKind::kEnter});
  CHECK(dw.step(frame(0.85, 0.5), 0).empty());  // only 450 ms since re-entry
  auto sel = dw.step(frame(0.9, 0.5), 0);
  REQUIRE(sel.size() == 1);
  CHECK(sel[0].kind == EventKind::kSelect);
  CHECK(sel[0].time_s == doctest::Approx(0.9));
  // continued residence selects again one dwell period later
  CHECK(dw.step(frame(1.35, 0.5), 0).empty());
  CHECK(kinds(dw.step(frame(1.4, 0.5), 0)) == std::vector<EventKind>{EventKind::kSelect});
}

TEST_CASE("dwell: exhaustive trace proof of zero error selections") {
  // two targets; streams over in/out/gap positions with three highlight
  // schedules; dwell may select only the highlighted target, never anything
  // else, and never emits error_select
  const std::vector<double> alphabet = {-9.0, -4.0, 0.0, 4.0, 9.0};
  const std::vector<Target> targets = {{0, -4.0, 4.0}, {1, 4.0, 4.0}};
  const int len = 6;
  long long streams = 0, selects = 0;
  for (int schedule = 0; schedule < 3; ++schedule) {
    std::vector<int> digits(len, 0);
    for (;;) {
      DwellTrigger dw(targets);
      for (int i = 0; i < len; ++i) {
        std::optional<int> high;
        if (schedule == 0) high = 0;
        if (schedule == 1) high = 1;
        if (schedule == 2 && i % 2 == 0) high = 1;  // flickering highlight
        const double x = alphabet[static_cast<size_t>(digits[static_cast<size_t>(i)])];
        for (const TriggerEvent& e : dw.step(frame(i * 0.3, x), high)) {
          CHECK(e.kind != EventKind::kErrorSelect);
          if (e.kind == EventKind::kSelect) {
            ++selects;
            REQUIRE(high.has_value());
            CHECK(e.target_id == *high);
            const Target& tg = targets[static_cast<size_t>(*high)];
            CHECK(tg.contains(e.coordinate_mm));
          }
        }
      }
      ++streams;
      int pos = len - 1;
      while (pos >= 0 && ++digits[static_cast<size_t>(pos)] == 5) {
        digits[static_cast<size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
  }
  CHECK(streams == 3 * 15625);  // 3 x 5^6
  CHECK(selects > 500);
}

TEST_CASE("pinch detector: one burst, one detection, on time") {
  ImuConfig cfg;
  cfg.duration_s = 1.5;
  cfg.pinch_times = {0.5};
  cfg.noise_rms = 0.0;
  ImuStream s = synthesize_imu(cfg);
  PinchDetector det;
  auto d = det.detect(s);
  REQUIRE(d.size() == 1);
  CHECK(d[0] >= 0.5);
  CHECK(d[0] <= 0.53);
}

TEST_CASE("pinch detector: refractory merges bursts 50 ms apart") {
  // two hand-built bursts at 0.5 and 0.55 on one axis
  ImuStream s;
  s.rate_hz = 100.0;
  s.samples.assign(150, {0.0, 0.0, 0.0});
  auto add_burst = [&](double t0) {
    for (size_t i = 0; i < s.samples.size(); ++i) {
      const double t = s.time_at(i) - t0;
      if (t < 0.0 || t > 0.18) continue;
      s.samples[i][0] += 12.0 * std::exp(-t / 0.05) *
                         std::sin(2.0 * std::numbers::pi * 35.0 * t + 0.8);
    }
  };
  add_burst(0.50);
  add_burst(0.55);
  PinchDetector det;
  auto d = det.detect(s);
  REQUIRE(d.size() == 1);
  CHECK(d[0] == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("pinch detector: twenty bursts, at least nineteen found") {
  ImuConfig cfg;
  cfg.duration_s = 12.0;
  cfg.seed = 21;
  for (int k = 0; k < 20; ++k) cfg.pinch_times.push_back(0.4 + 0.55 * k);
  ImuStream s = synthesize_imu(cfg);
  PinchDetector det;
  auto d = det.detect(s);
  int hits = 0;
  std::vector<bool> used(d.size(), false);
  for (double t : cfg.pinch_times)
    for (size_t i = 0; i < d.size(); ++i)
      if (!used[i] && std::abs(d[i] - t) <= 0.03) {
        used[i] = true;
        ++hits;
        break;
      }
  CHECK(hits >= 19);
}

TEST_CASE("pinch trigger: rewound coordinate is linearly interpolated") {
  PinchTrigger pt({{1, 4.0, 3.0}}, 10.0);  // 10 ms rewind, target [2.5, 5.5]
  pt.step(frame(0.00, 0.0), 1);
  pt.step(frame(0.04, 4.0), 1);
  auto ev = pt.pinch(0.04, 1);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].kind == EventKind::kSelect);
  // 10 ms before 0.04 lies three quarters into the segment 0 -> 4
  CHECK(ev[0].coordinate_mm == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(ev[0].target_id == 1);
  CHECK(ev[0].time_s == doctest::Approx(0.04));
}

TEST_CASE("pinch trigger: zero offset selects at the newest sample") {
  PinchTrigger pt({{1, 4.0, 3.0}}, 0.0);
  pt.step(frame(0.00, 0.0), 1);
  pt.step(frame(0.04, 4.0), 1);
  auto ev = pt.pinch(0.04, 1);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].coordinate_mm == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(ev[0].kind == EventKind::kSelect);
}

TEST_CASE("pinch trigger: off-target and wrong-target pinches are errors") {
  PinchTrigger pt({{1, 4.0, 3.0}, {2, 12.0, 3.0}}, 0.0);
  pt.step(frame(0.00, 0.0), 1);
  auto miss = pt.pinch(0.0, 1);  // coordinate 0 is outside every target
  REQUIRE(miss.size() == 1);
  CHECK(miss[0].kind == EventKind::kErrorSelect);
  CHECK(!miss[0].target_id.has_value());

  pt.step(frame(0.04, 12.0), 1);
  auto wrong = pt.pinch(0.04, 1);  // lands in target 2 while 1 is the goal
  REQUIRE(wrong.size() == 1);
  CHECK(wrong[0].kind == EventKind::kErrorSelect);
  CHECK(wrong[0].target_id == 2);
}

TEST_CASE("pinch trigger: offsets beyond stored history are contract errors") {
  PinchTrigger pt({{1, 4.0, 3.0}}, 100.0);
  CHECK_THROWS_AS(pt.pinch(0.0, 1), ContractViolation);  // empty history
  pt.step(frame(0.00, 0.0), 1);
  CHECK_THROWS_AS(pt.pinch(0.05, 1), ContractViolation);  // only 50 ms stored

  CHECK_THROWS_AS(PinchTrigger({{1, 4.0, 3.0}}, 1500.0, 1.0), ConfigError);
  CHECK_THROWS_AS(PinchTrigger({{1, 4.0, 3.0}}, -1.0), ConfigError);
}

TEST_CASE("pinch trigger: cursor stream yields enter and exit events") {
  PinchTrigger pt({{1, 4.0, 3.0}}, 0.0);
  CHECK(pt.step(frame(0.00, 0.0), 1).empty());
  auto in = pt.step(frame(0.04, 4.0), 1);
  REQUIRE(in.size() == 1);
  CHECK(in[0].kind == EventKind::kEnter);
  auto out = pt.step(frame(0.08, 8.0), 1);
  REQUIRE(out.size() == 1);
  CHECK(out[0].kind == EventKind::kExit);
}

TEST_CASE("haptics annotate enters and selections") {
  std::vector<TriggerEvent> ev;
  auto push = [&](EventKind k) {
    TriggerEvent e;
    e.kind = k;
    e.time_s = static_cast<double>(ev.size());
    ev.push_back(e);
  };
  push(EventKind::kEnter);
  push(EventKind::kExit);
  push(EventKind::kEnter);
  push(EventKind::kSelect);

  HapticsConfig cfg;
  auto out = apply_haptics(ev, cfg);
  REQUIRE(out.size() == 7);  // 3 pulses appended in place
  CHECK(out[1].kind == EventKind::kHapticPulse);
  CHECK(out[1].haptic->duration_ms == doctest::Approx(10.0));
  CHECK(out[1].haptic->intensity == doctest::Approx(0.5));
  CHECK(out[4].kind == EventKind::kHapticPulse);
  CHECK(out[6].kind == EventKind::kHapticPulse);
  CHECK(out[6].haptic->duration_ms == doctest::Approx(20.0));
  CHECK(out[6].haptic->intensity == doctest::Approx(1.0));

  // error selections confirm too: the device reports what it executed
  std::vector<TriggerEvent> err(1);
  err[0].kind = EventKind::kErrorSelect;
  auto out2 = apply_haptics(err, cfg);
  REQUIRE(out2.size() == 2);
  CHECK(out2[1].haptic->duration_ms == doctest::Approx(20.0));

  cfg.enabled = false;
  auto off = apply_haptics(ev, cfg);
  CHECK(off.size() == ev.size());
  for (size_t i = 0; i < off.size(); ++i) CHECK(off[i].kind == ev[i].kind);
}
