#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sonarcursor/agent.hpp"

using namespace sonar;

namespace {

const Target& goal_target(const TaskSpec& spec, int id) {
  for (const Target& t : spec.targets)
    if (t.id == id) return t;
  REQUIRE(false);
  return spec.targets.front();
}

bool same_records(const std::vector<TrialRecord>& a, const std::vector<TrialRecord>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].selections.size() != b[i].selections.size()) return false;
    for (size_t j = 0; j < a[i].selections.size(); ++j) {
      const SelectionRecord& x = a[i].selections[j];
      const SelectionRecord& y = b[i].selections[j];
      if (x.endpoint_mm != y.endpoint_mm || x.t_select != y.t_select ||
          x.t_start != y.t_start || x.error != y.error || x.missing != y.missing ||
          x.re_entries != y.re_entries || x.prev_mm != y.prev_mm)
        return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("trial plans are a pure function of the rng state") {
  const TaskSpec spec = make_study1_trial(3.0, 15.0);
  AgentParams params;
  std::mt19937_64 r1(42), r2(42), r3(43);
  TrialPlan p1 = plan_trial(spec, Method::kPinch, params, r1);
  TrialPlan p2 = plan_trial(spec, Method::kPinch, params, r2);
  TrialPlan p3 = plan_trial(spec, Method::kPinch, params, r3);
  CHECK(p1.duration_s == p2.duration_s);
  REQUIRE(p1.pinch_impact_times.size() == p2.pinch_impact_times.size());
  for (size_t i = 0; i < p1.pinch_impact_times.size(); ++i)
    CHECK(p1.pinch_impact_times[i] == p2.pinch_impact_times[i]);
  REQUIRE(p1.attempts.size() == p2.attempts.size());
  for (size_t i = 0; i < p1.attempts.size(); ++i)
    CHECK(p1.attempts[i].t_complete == p2.attempts[i].t_complete);
  for (double t = 0.0; t < p1.duration_s; t += 0.1)
    CHECK(p1.position(t) == p2.position(t));
  CHECK(p1.duration_s != p3.duration_s);  // a different seed plans differently
}

TEST_CASE("pinch plans keep grip impacts separated and ordered") {
  AgentParams params;
  for (std::uint64_t s : {1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u}) {
    const TaskSpec spec = make_study1_trial(3.0, 15.0);
    std::mt19937_64 rng(s);
    TrialPlan p = plan_trial(spec, Method::kPinch, params, rng);
    REQUIRE(p.attempts.size() == spec.sequence.size());
    REQUIRE(p.pinch_impact_times.size() == spec.sequence.size());
    for (size_t i = 0; i < p.pinch_impact_times.size(); ++i) {
      if (i > 0)
        CHECK(p.pinch_impact_times[i] - p.pinch_impact_times[i - 1] >= 0.25 - 1e-12);
      CHECK(p.pinch_impact_times[i] >= p.attempts[i].t_begin + 0.05 - 1e-12);
      CHECK(p.attempts[i].t_complete ==
            doctest::Approx(p.pinch_impact_times[i] + params.trigger_latency_s));
    }
  }
}

TEST_CASE("ideal-cursor dwell runs select everything, in the target, on time") {
  RunConfig cfg;
  cfg.method = Method::kDwell;
  const TaskSpec spec = make_study1_trial(6.0, 12.0);
  TrialRun run = run_trial(spec, cfg, 17);
  REQUIRE(run.record.selections.size() == 6);
  double prev_t = 0.0;
  for (const SelectionRecord& s : run.record.selections) {
    CHECK(!s.error);
    CHECK(!s.missing);
    CHECK(goal_target(spec, s.goal_id).contains(s.endpoint_mm));
    CHECK(s.t_select >= prev_t);
    CHECK(s.t_select > s.t_start);
    prev_t = s.t_select;
  }
  // selections alternate right, left, right, ...
  CHECK(run.record.selections[0].goal_id == 1);
  CHECK(run.record.selections[1].goal_id == 0);
  // the chain of movement origins is consistent
  CHECK(run.record.selections[0].prev_mm == doctest::Approx(spec.start_mm));
  for (size_t i = 1; i < 6; ++i)
    CHECK(run.record.selections[i].prev_mm ==
          doctest::Approx(run.record.selections[i - 1].endpoint_mm));
}

TEST_CASE("ideal-cursor crossing runs rarely err and never re-enter") {
  RunConfig cfg;
  cfg.method = Method::kDoubleCrossing;
  auto specs = make_study1_protocol({});
  auto records = run_protocol(specs, cfg, 19);
  int errors = 0, missing = 0, re = 0, sels = 0;
  for (const auto& r : records)
    for (const auto& s : r.selections) {
      ++sels;
      errors += s.error;
      missing += s.missing;
      re += s.re_entries;
    }
  CHECK(sels == 288);
  // hesitation bounces occasionally double-select; anything beyond ~1% would
  // mean the planner and the edge grammar disagree
  CHECK(errors * 100 <= sels);
  CHECK(missing == 0);
  CHECK(re == 0);
}

TEST_CASE("crossing is faster than dwell on the same protocol") {
  auto specs = make_study1_protocol({});
  RunConfig dc, dw;
  dc.method = Method::kDoubleCrossing;
  dw.method = Method::kDwell;
  auto sum_dc = summarize(run_protocol(specs, dc, 23));
  auto sum_dw = summarize(run_protocol(specs, dw, 23));
  REQUIRE(sum_dc.groups.size() == 1);
  REQUIRE(sum_dw.groups.size() == 1);
  CHECK(sum_dc.groups[0].mt_mean < sum_dw.groups[0].mt_mean);
  CHECK(sum_dc.groups[0].tp_mean_of_means > sum_dw.groups[0].tp_mean_of_means);
}

TEST_CASE("repeat-heavy sequences trip the crossing method, not dwell") {
  auto specs = make_study2_protocol({});
  RunConfig dc, dw;
  dc.method = Method::kDoubleCrossing;
  dw.method = Method::kDwell;
  int dc_err = 0, dw_err = 0;
  for (const auto& r : run_protocol(specs, dc, 29))
    for (const auto& s : r.selections) dc_err += s.error;
  for (const auto& r : run_protocol(specs, dw, 29))
    for (const auto& s : r.selections) dw_err += s.error;
  CHECK(dc_err > 0);
  CHECK(dw_err == 0);
}

TEST_CASE("protocol runs are reproducible and thread-count invariant") {
  Study1Config small;
  small.blocks = 2;
  auto specs = make_study1_protocol(small);
  RunConfig cfg;
  cfg.method = Method::kPinch;
  auto a = run_protocol(specs, cfg, 31, 1);
  auto b = run_protocol(specs, cfg, 31, 1);
  auto c = run_protocol(specs, cfg, 31, 2);
  CHECK(same_records(a, b));
  CHECK(same_records(a, c));
  auto d = run_protocol(specs, cfg, 32, 1);
  CHECK(!same_records(a, d));
}

TEST_CASE("tracked-pipeline endpoints agree with the ideal cursor") {
  Study1Config small;
  small.blocks = 2;
  small.widths_mm = {6.0, 9.0};
  small.amplitudes_mm = {12.0};
  auto specs = make_study1_protocol(small);
  RunConfig ideal, full;
  ideal.method = Method::kDwell;
  full.method = Method::kDwell;
  full.full_pipeline = true;
  auto ra = run_protocol(specs, ideal, 37);
  auto rb = run_protocol(specs, full, 37);
  REQUIRE(ra.size() == rb.size());
  double diff_sum = 0.0;
  int n = 0;
  for (size_t i = 0; i < ra.size(); ++i) {
    REQUIRE(ra[i].selections.size() == rb[i].selections.size());
    for (size_t j = 0; j < ra[i].selections.size(); ++j) {
      CHECK(!rb[i].selections[j].missing);
      diff_sum += std::abs(ra[i].selections[j].endpoint_mm -
                           rb[i].selections[j].endpoint_mm);
      ++n;
    }
  }
  CHECK(n == 48);
  CHECK(diff_sum / n <= 1.0);  // tracked cursor lands within a millimetre
}

TEST_CASE("offset sweep: the zero offset is its own baseline") {
  Study1Config small;
  small.blocks = 2;
  auto specs = make_study1_protocol(small);
  RunConfig cfg;
  cfg.method = Method::kPinch;
  const std::vector<double> offsets = {0.0, 40.0, 80.0};
  OffsetSweepResult sweep = run_offset_sweep(specs, cfg, 41, offsets);
  REQUIRE(sweep.points.size() == 3);
  CHECK(sweep.points[0].offset_ms == doctest::Approx(0.0));
  CHECK(sweep.points[0].corrected_pp == doctest::Approx(0.0));
  CHECK(sweep.points[0].premature_pp == doctest::Approx(0.0));
  CHECK(sweep.points[0].er_pct == doctest::Approx(sweep.baseline_er_pct));
  for (size_t i = 1; i < sweep.points.size(); ++i) {
    CHECK(sweep.points[i].offset_ms > sweep.points[i - 1].offset_ms);
    CHECK(sweep.points[i].er_pct >= 0.0);
    CHECK(sweep.points[i].er_pct <= 100.0);
  }
}
