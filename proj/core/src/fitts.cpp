#include "sonarcursor/fitts.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include "sonarcursor/errors.hpp"

namespace sonar {

namespace {

constexpr double kDisplayCenter = kDisplayWidthMm / 2.0;

Target make_target(int id, double center, double width) {
  Target t;
  t.id = id;
  t.center_mm = center;
  t.width_mm = width;
  return t;
}

}  // namespace

TaskSpec make_study1_trial(double width_mm, double amplitude_mm) {
  if (width_mm <= 0.0 || amplitude_mm <= width_mm)
    throw ConfigError("study1 trial needs 0 < W < A");
  if (kDisplayCenter + amplitude_mm / 2.0 + width_mm / 2.0 > kDisplayWidthMm)
    throw ConfigError("study1 trial does not fit the display");
  TaskSpec spec;
  spec.study = 1;
  spec.width_mm = width_mm;
  spec.amplitude_mm = amplitude_mm;
  const double left = kDisplayCenter - amplitude_mm / 2.0;
  const double right = kDisplayCenter + amplitude_mm / 2.0;
  spec.targets = {make_target(0, left, width_mm), make_target(1, right, width_mm)};
  validate_targets(spec.targets);
  spec.sequence = {1, 0, 1, 0, 1, 0};
  spec.start_mm = left;
  return spec;
}

std::vector<TaskSpec> make_study1_block(std::mt19937_64& rng,
                                        std::span<const double> widths,
                                        std::span<const double> amplitudes,
                                        int block_index) {
  std::vector<TaskSpec> block;
  for (double w : widths)
    for (double a : amplitudes)
      for (int rep = 0; rep < 2; ++rep) {
        TaskSpec spec = make_study1_trial(w, a);
        spec.block = block_index;
        block.push_back(spec);
      }
  std::shuffle(block.begin(), block.end(), rng);
  return block;
}

std::vector<TaskSpec> make_study1_protocol(const Study1Config& cfg) {
  if (cfg.blocks < 2) throw ConfigError("study1 needs a practice block plus data blocks");
  std::mt19937_64 rng(cfg.seed);
  std::vector<TaskSpec> all;
  int index = 0;
  for (int b = 0; b < cfg.blocks; ++b) {
    auto block = make_study1_block(rng, cfg.widths_mm, cfg.amplitudes_mm, b);
    for (auto& spec : block) {
      spec.practice = (b == 0);
      spec.trial_index = index++;
      all.push_back(std::move(spec));
    }
  }
  return all;
}

std::vector<std::array<int, 3>> enumerate_study2_sequences(int start) {
  // Moves classified by index distance: 0 repeat, 1 adjacent, 2 non-adjacent.
  // A valid sequence uses each class exactly once.
  std::vector<std::array<int, 3>> out;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        const int d1 = std::abs(a - start);
        const int d2 = std::abs(b - a);
        const int d3 = std::abs(c - b);
        int seen[3] = {0, 0, 0};
        seen[d1]++;
        seen[d2]++;
        seen[d3]++;
        if (seen[0] == 1 && seen[1] == 1 && seen[2] == 1)
          out.push_back({a, b, c});
      }
  return out;
}

TaskSpec make_study2_trial(std::mt19937_64& rng) {
  TaskSpec spec;
  spec.study = 2;
  spec.width_mm = 6.0;
  spec.amplitude_mm = 12.0;
  spec.targets = {make_target(0, kDisplayCenter - 12.0, 6.0),
                  make_target(1, kDisplayCenter, 6.0),
                  make_target(2, kDisplayCenter + 12.0, 6.0)};
  validate_targets(spec.targets);
  spec.start_mm = 0.0;
  const int start = static_cast<int>(rng() % 3);
  auto options = enumerate_study2_sequences(start);
  const auto& moves = options[rng() % options.size()];
  spec.sequence = {start, moves[0], moves[1], moves[2]};
  return spec;
}

std::vector<TaskSpec> make_study2_protocol(const Study2Config& cfg) {
  if (cfg.blocks < 2) throw ConfigError("study2 needs a practice block plus data blocks");
  std::mt19937_64 rng(cfg.seed);
  std::vector<TaskSpec> all;
  int index = 0;
  for (int b = 0; b < cfg.blocks; ++b)
    for (int t = 0; t < cfg.trials_per_block; ++t) {
      TaskSpec spec = make_study2_trial(rng);
      spec.block = b;
      spec.practice = (b == 0);
      spec.trial_index = index++;
      all.push_back(std::move(spec));
    }
  return all;
}

double effective_id(double a_e, double w_e) {
  if (a_e < 0.0) throw ContractViolation("effective_id: negative amplitude");
  w_e = std::max(w_e, kWeFloorMm);
  return std::log2(a_e / w_e + 1.0);
}

std::optional<FittsFit> fit_fitts(std::span<const FitPoint> points) {
  if (points.size() < 3) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.id_e;
    my += p.mt;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    sxx += (p.id_e - mx) * (p.id_e - mx);
    sxy += (p.id_e - mx) * (p.mt - my);
    syy += (p.mt - my) * (p.mt - my);
  }
  if (sxx < 1e-12) return std::nullopt;  // no ID spread, slope undefined
  FittsFit fit;
  fit.b = sxy / sxx;
  fit.a = my - fit.b * mx;
  if (syy < 1e-30) {
    fit.r2 = 1.0;
  } else {
    double ss_res = 0.0;
    for (const auto& p : points) {
      const double r = p.mt - (fit.a + fit.b * p.id_e);
      ss_res += r * r;
    }
    fit.r2 = 1.0 - ss_res / syy;
  }
  return fit;
}

namespace {

struct CellAccum {
  double width = 0.0, amplitude = 0.0;
  std::vector<double> deviations;  // signed, along the movement axis
  std::vector<double> amplitudes;  // actual |endpoint - prev|
  std::vector<double> mts;
  int errors = 0, missing = 0, trials = 0, re_entries = 0;
};

struct GroupKey {
  int study;
  int method;
  bool haptics;
  bool operator<(const GroupKey& o) const {
    if (study != o.study) return study < o.study;
    if (method != o.method) return method < o.method;
    return haptics < o.haptics;
  }
};

}  // namespace

FittsSummary summarize(std::span<const TrialRecord> records) {
  std::map<GroupKey, std::map<std::pair<double, double>, CellAccum>> groups;
  for (const auto& rec : records) {
    if (rec.spec.practice) continue;
    const GroupKey key{rec.spec.study, static_cast<int>(rec.method), rec.haptics};
    const auto cell_key = std::make_pair(rec.spec.width_mm, rec.spec.amplitude_mm);
    CellAccum& cell = groups[key][cell_key];
    cell.width = rec.spec.width_mm;
    cell.amplitude = rec.spec.amplitude_mm;
    cell.trials++;
    for (const auto& sel : rec.selections) {
      if (sel.missing) {
        cell.missing++;
        continue;
      }
      const double dir = (sel.goal_center_mm >= sel.prev_mm) ? 1.0 : -1.0;
      cell.deviations.push_back((sel.endpoint_mm - sel.goal_center_mm) * dir);
      cell.amplitudes.push_back(std::abs(sel.endpoint_mm - sel.prev_mm));
      cell.mts.push_back(sel.t_select - sel.t_start);
      if (sel.error) cell.errors++;
      cell.re_entries += sel.re_entries;
    }
  }

  FittsSummary summary;
  for (const auto& [key, cells] : groups) {
    MethodSummary ms;
    ms.study = key.study;
    ms.method = static_cast<Method>(key.method);
    ms.haptics = key.haptics;
    double mt_sum_all = 0.0, tp_sum = 0.0;
    double pooled_bits = 0.0, pooled_time = 0.0;
    std::vector<FitPoint> points;
    for (const auto& [cell_key, cell] : cells) {
      const int n = static_cast<int>(cell.mts.size());
      ms.trials += cell.trials;
      ms.missing += cell.missing;
      if (n < 2) continue;  // not enough endpoints for an effective width
      ConditionStats cs;
      cs.width_mm = cell.width;
      cs.amplitude_mm = cell.amplitude;
      cs.selections = n;
      cs.errors = cell.errors;
      cs.missing = cell.missing;
      cs.trials = cell.trials;
      cs.re_entries = cell.re_entries;
      cs.a_e = std::accumulate(cell.amplitudes.begin(), cell.amplitudes.end(), 0.0) / n;
      const double dev_mean =
          std::accumulate(cell.deviations.begin(), cell.deviations.end(), 0.0) / n;
      double ss = 0.0;
      for (double d : cell.deviations) ss += (d - dev_mean) * (d - dev_mean);
      const double sd = std::sqrt(ss / (n - 1));
      cs.w_e = kWeSigmaFactor * sd;
      cs.w_e_floored = cs.w_e < kWeFloorMm;
      if (cs.w_e_floored) cs.w_e = kWeFloorMm;
      cs.id_e = effective_id(cs.a_e, cs.w_e);
      cs.mt_mean = std::accumulate(cell.mts.begin(), cell.mts.end(), 0.0) / n;
      cs.tp = cs.id_e / cs.mt_mean;
      cs.er_pct = 100.0 * cell.errors / n;
      cs.tre_per_trial = cell.trials > 0 ? static_cast<double>(cell.re_entries) / cell.trials : 0.0;
      ms.cells.push_back(cs);

      ms.selections += n;
      ms.errors += cell.errors;
      mt_sum_all += cs.mt_mean * n;
      tp_sum += cs.tp;
      pooled_bits += cs.id_e * n;
      pooled_time += cs.mt_mean * n;
      points.push_back({cs.id_e, cs.mt_mean});
    }
    if (ms.cells.empty()) continue;
    std::sort(ms.cells.begin(), ms.cells.end(), [](const auto& a, const auto& b) {
      if (a.width_mm != b.width_mm) return a.width_mm < b.width_mm;
      return a.amplitude_mm < b.amplitude_mm;
    });
    ms.tp_mean_of_means = tp_sum / static_cast<double>(ms.cells.size());
    ms.tp_pooled = pooled_time > 0.0 ? pooled_bits / pooled_time : 0.0;
    ms.mt_mean = ms.selections > 0 ? mt_sum_all / ms.selections : 0.0;
    ms.er_pct = ms.selections > 0 ? 100.0 * ms.errors / ms.selections : 0.0;
    int total_re = 0;
    for (const auto& c : ms.cells) total_re += c.re_entries;
    ms.tre_per_trial = ms.trials > 0 ? static_cast<double>(total_re) / ms.trials : 0.0;
    ms.fit = fit_fitts(points);
    summary.groups.push_back(std::move(ms));
  }
  return summary;
}

}  // namespace sonar
