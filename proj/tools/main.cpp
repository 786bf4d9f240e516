// Command-line front end: scenario batches, file I/O, reports and plots.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sonarcursor/agent.hpp"
#include "sonarcursor/errors.hpp"
#include "sonarcursor/fitts.hpp"
#include "sonarcursor/report.hpp"
#include "sonarcursor/simulate.hpp"
#include "sonarcursor/syseval.hpp"
#include "sonarcursor/tracking.hpp"
#include "sonarcursor/wav.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool plot = false;
  int threads = 1;
};

json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw sonar::ConfigError("cannot open config: " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw sonar::ConfigError("config parse failure (" + path + "): " + e.what());
  }
}

json maybe_config(const Common& c) {
  if (c.config_path.empty()) return json::object();
  return load_json_file(c.config_path);
}

void ensure_out(const Common& c) { fs::create_directories(c.out_dir); }

std::string out_path(const Common& c, const std::string& name) {
  return (fs::path(c.out_dir) / name).string();
}

sonar::Method parse_method(const std::string& s) {
  if (s == "double_crossing") return sonar::Method::kDoubleCrossing;
  if (s == "dwell") return sonar::Method::kDwell;
  if (s == "pinch") return sonar::Method::kPinch;
  throw sonar::ConfigError("unknown method: " + s);
}

double jget(const json& j, const char* key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}

void apply_agent_overrides(sonar::AgentParams& p, const json& j) {
  p.reaction_time_s = jget(j, "reaction_time_s", p.reaction_time_s);
  p.fixation_s = jget(j, "fixation_s", p.fixation_s);
  p.peak_speed_mm_s = jget(j, "peak_speed_mm_s", p.peak_speed_mm_s);
  p.move_a_s = jget(j, "move_a_s", p.move_a_s);
  p.move_b_s_per_bit = jget(j, "move_b_s_per_bit", p.move_b_s_per_bit);
  p.move_jitter = jget(j, "move_jitter", p.move_jitter);
  p.endpoint_sd_fraction = jget(j, "endpoint_sd_fraction", p.endpoint_sd_fraction);
  p.overshoot_prob = jget(j, "overshoot_prob", p.overshoot_prob);
  p.overshoot_mm = jget(j, "overshoot_mm", p.overshoot_mm);
  p.hesitation_prob = jget(j, "hesitation_prob", p.hesitation_prob);
  p.hesitation_in_mm = jget(j, "hesitation_in_mm", p.hesitation_in_mm);
  p.hesitation_out_mm = jget(j, "hesitation_out_mm", p.hesitation_out_mm);
  p.dc_depth_frac = jget(j, "dc_depth_frac", p.dc_depth_frac);
  p.dc_exit_mm = jget(j, "dc_exit_mm", p.dc_exit_mm);
  p.dc_reverse_s = jget(j, "dc_reverse_s", p.dc_reverse_s);
  p.dwell_hold_s = jget(j, "dwell_hold_s", p.dwell_hold_s);
  p.pinch_main_sd_mm = jget(j, "pinch_main_sd_mm", p.pinch_main_sd_mm);
  p.pinch_homing_frac = jget(j, "pinch_homing_frac", p.pinch_homing_frac);
  p.pinch_correction_s = jget(j, "pinch_correction_s", p.pinch_correction_s);
  p.pinch_pause_s = jget(j, "pinch_pause_s", p.pinch_pause_s);
  p.pinch_settle_mean_s = jget(j, "pinch_settle_mean_s", p.pinch_settle_mean_s);
  p.pinch_settle_sd_s = jget(j, "pinch_settle_sd_s", p.pinch_settle_sd_s);
  p.pinch_settle_min_s = jget(j, "pinch_settle_min_s", p.pinch_settle_min_s);
  p.pinch_rush_prob = jget(j, "pinch_rush_prob", p.pinch_rush_prob);
  p.pinch_rush_settle_mean_s = jget(j, "pinch_rush_settle_mean_s", p.pinch_rush_settle_mean_s);
  p.pinch_rush_settle_sd_s = jget(j, "pinch_rush_settle_sd_s", p.pinch_rush_settle_sd_s);
  p.pinch_rush_settle_min_s = jget(j, "pinch_rush_settle_min_s", p.pinch_rush_settle_min_s);
  p.pinch_close_s = jget(j, "pinch_close_s", p.pinch_close_s);
  p.trigger_latency_s = jget(j, "trigger_latency_s", p.trigger_latency_s);
  p.pinch_kick_mean_mm = jget(j, "pinch_kick_mean_mm", p.pinch_kick_mean_mm);
  p.pinch_kick_sd_mm = jget(j, "pinch_kick_sd_mm", p.pinch_kick_sd_mm);
}

json agent_to_json(const sonar::AgentParams& p) {
  return json{{"reaction_time_s", p.reaction_time_s},
              {"fixation_s", p.fixation_s},
              {"peak_speed_mm_s", p.peak_speed_mm_s},
              {"move_a_s", p.move_a_s},
              {"move_b_s_per_bit", p.move_b_s_per_bit},
              {"move_jitter", p.move_jitter},
              {"endpoint_sd_fraction", p.endpoint_sd_fraction},
              {"overshoot_prob", p.overshoot_prob},
              {"overshoot_mm", p.overshoot_mm},
              {"hesitation_prob", p.hesitation_prob},
              {"hesitation_in_mm", p.hesitation_in_mm},
              {"hesitation_out_mm", p.hesitation_out_mm},
              {"dc_depth_frac", p.dc_depth_frac},
              {"dc_exit_mm", p.dc_exit_mm},
              {"dc_reverse_s", p.dc_reverse_s},
              {"dwell_hold_s", p.dwell_hold_s},
              {"pinch_main_sd_mm", p.pinch_main_sd_mm},
              {"pinch_homing_frac", p.pinch_homing_frac},
              {"pinch_correction_s", p.pinch_correction_s},
              {"pinch_pause_s", p.pinch_pause_s},
              {"pinch_settle_mean_s", p.pinch_settle_mean_s},
              {"pinch_settle_sd_s", p.pinch_settle_sd_s},
              {"pinch_settle_min_s", p.pinch_settle_min_s},
              {"pinch_rush_prob", p.pinch_rush_prob},
              {"pinch_rush_settle_mean_s", p.pinch_rush_settle_mean_s},
              {"pinch_rush_settle_sd_s", p.pinch_rush_settle_sd_s},
              {"pinch_rush_settle_min_s", p.pinch_rush_settle_min_s},
              {"pinch_close_s", p.pinch_close_s},
              {"trigger_latency_s", p.trigger_latency_s},
              {"pinch_kick_mean_mm", p.pinch_kick_mean_mm},
              {"pinch_kick_sd_mm", p.pinch_kick_sd_mm}};
}

// --- syseval ---------------------------------------------------------------

int cmd_syseval(const Common& c) {
  const json j = maybe_config(c);
  sonar::StageProtocolConfig cfg;
  if (j.contains("range_lo_mm")) cfg.range_lo_mm = j.at("range_lo_mm").get<std::vector<double>>();
  if (j.contains("speeds_mm_s")) cfg.speeds_mm_s = j.at("speeds_mm_s").get<std::vector<double>>();
  cfg.reps = static_cast<int>(jget(j, "reps", cfg.reps));
  cfg.move_mm = jget(j, "move_mm", cfg.move_mm);
  cfg.hold_s = jget(j, "hold_s", cfg.hold_s);
  cfg.clean_snr_db = jget(j, "clean_snr_db", cfg.clean_snr_db);
  cfg.noisy_snr_db = jget(j, "noisy_snr_db", cfg.noisy_snr_db);
  cfg.finger_gain = jget(j, "finger_gain", cfg.finger_gain);
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (c.seed_given) cfg.seed = c.seed;

  sonar::SonarConfig sonar_cfg;
  sonar::TrackerConfig tracker_cfg;

  json resolved = {{"range_lo_mm", cfg.range_lo_mm}, {"speeds_mm_s", cfg.speeds_mm_s},
                   {"reps", cfg.reps},               {"move_mm", cfg.move_mm},
                   {"hold_s", cfg.hold_s},           {"clean_snr_db", cfg.clean_snr_db},
                   {"noisy_snr_db", cfg.noisy_snr_db}, {"finger_gain", cfg.finger_gain},
                   {"seed", cfg.seed}};
  sonar::ReportMeta meta{1, cfg.seed, sonar::hash_hex(resolved.dump())};

  const auto result = sonar::run_system_eval(cfg, sonar_cfg, tracker_cfg, c.threads);

  ensure_out(c);
  std::string trials = sonar::meta_comment(meta);
  trials += "range_lo_mm,speed_mm_s,noise,rep,direction,truth_mm,measured_mm,abs_err_mm\n";
  for (const auto& t : result.trials) {
    trials += sonar::fmt_num(t.range_lo_mm) + "," + sonar::fmt_num(t.speed_mm_s) + "," +
              (t.noise_on ? "walker" : "clean") + "," + std::to_string(t.rep) + "," +
              (t.downward ? "down" : "up") + "," + sonar::fmt_num(t.truth_mm) + "," +
              sonar::fmt_num(t.measured_mm) + "," + sonar::fmt_num(t.abs_err_mm) + "\n";
  }
  sonar::write_text_file(out_path(c, "syseval_trials.csv"), trials);

  std::string cells = sonar::meta_comment(meta);
  cells += "range_lo_mm,speed_mm_s,noise,n,mean_err_mm,sd_err_mm\n";
  for (const auto& cc : result.cells) {
    cells += sonar::fmt_num(cc.range_lo_mm) + "," + sonar::fmt_num(cc.speed_mm_s) + "," +
             (cc.noise_on ? "walker" : "clean") + "," + std::to_string(cc.n) + "," +
             sonar::fmt_num(cc.mean_err_mm) + "," + sonar::fmt_num(cc.sd_err_mm) + "\n";
  }
  sonar::write_text_file(out_path(c, "syseval_cells.csv"), cells);

  if (c.plot) {
    std::map<std::pair<bool, double>, sonar::SvgSeries> series;
    for (const auto& cc : result.cells) {
      auto& s = series[{cc.noise_on, cc.speed_mm_s}];
      s.label = std::string(cc.noise_on ? "walker " : "clean ") + sonar::fmt_num(cc.speed_mm_s) +
                " mm/s";
      s.points.push_back({cc.range_lo_mm, cc.mean_err_mm});
    }
    std::vector<sonar::SvgSeries> list;
    for (auto& [k, s] : series) list.push_back(std::move(s));
    sonar::write_text_file(out_path(c, "syseval.svg"),
                           sonar::svg_line_chart("Displacement error by distance band",
                                                 "band start (mm)", "mean abs error (mm)", list));
  }
  std::printf("syseval: %zu trials, %zu cells -> %s\n", result.trials.size(),
              result.cells.size(), c.out_dir.c_str());
  return 0;
}

// --- simulate ----------------------------------------------------------------

int cmd_simulate(const Common& c) {
  if (c.config_path.empty()) throw sonar::ConfigError("simulate requires --config scene JSON");
  std::ifstream f(c.config_path);
  if (!f) throw sonar::ConfigError("cannot open config: " + c.config_path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  sonar::SceneConfig scene = sonar::parse_scene_json(text);
  if (c.seed_given) scene.seed = c.seed;
  scene.validate();

  sonar::SonarConfig sonar_cfg;
  const sonar::EchoSim sim = sonar::synthesize_echo(scene, sonar_cfg);
  sonar::ReportMeta meta{1, scene.seed, sonar::hash_hex(sonar::scene_to_json(scene))};

  ensure_out(c);
  sonar::write_wav(out_path(c, "scene.wav"), sim.audio, static_cast<int>(sonar_cfg.sample_rate));
  std::string truth = sonar::meta_comment(meta);
  truth += "time_s,range_mm\n";
  for (const auto& ts : sim.truth)
    truth += sonar::fmt_num(ts.time_s) + "," + sonar::fmt_num(ts.range_mm) + "\n";
  sonar::write_text_file(out_path(c, "truth.csv"), truth);
  sonar::write_text_file(out_path(c, "scene_resolved.json"), sonar::scene_to_json(scene) + "\n");

  if (c.plot) {
    sonar::SvgSeries s;
    s.label = "finger range";
    for (std::size_t i = 0; i < sim.truth.size(); i += 4)
      s.points.push_back({sim.truth[i].time_s, sim.truth[i].range_mm});
    sonar::write_text_file(out_path(c, "truth.svg"),
                           sonar::svg_line_chart("Synthesized finger range", "time (s)",
                                                 "range (mm)", {s}));
  }
  std::printf("simulate: %zu audio samples, %zu truth rows -> %s\n", sim.audio.size(),
              sim.truth.size(), c.out_dir.c_str());
  return 0;
}

// --- track -------------------------------------------------------------------

int cmd_track(const Common& c, const std::string& input) {
  const json j = maybe_config(c);
  sonar::SonarConfig sonar_cfg;
  sonar::TrackerConfig tracker_cfg;
  tracker_cfg.levd.pp_threshold = jget(j, "pp_threshold", tracker_cfg.levd.pp_threshold);
  tracker_cfg.euro.min_cutoff = jget(j, "one_euro_min_cutoff_hz", tracker_cfg.euro.min_cutoff);
  tracker_cfg.euro.beta = jget(j, "one_euro_beta", tracker_cfg.euro.beta);
  tracker_cfg.window_s = jget(j, "window_s", tracker_cfg.window_s);

  const sonar::WavData wav = sonar::read_wav(input);
  const int expected_rate = static_cast<int>(sonar_cfg.sample_rate);
  if (wav.sample_rate != expected_rate)
    throw sonar::ConfigError("track: wav sample rate " + std::to_string(wav.sample_rate) +
                             " != expected " + std::to_string(expected_rate));

  tracker_cfg.sonar = sonar_cfg;
  sonar::Tracker tracker(tracker_cfg);
  std::vector<sonar::CursorState> track;
  std::vector<double> raw;
  const int flen = sonar_cfg.frame_len;
  for (std::size_t i = 0; i + flen <= wav.samples.size(); i += flen) {
    sonar::AudioFrame frame;
    frame.samples.assign(wav.samples.begin() + i, wav.samples.begin() + i + flen);
    frame.start_time = static_cast<double>(i) / sonar_cfg.sample_rate;
    track.push_back(tracker.process(frame));
    raw.push_back(tracker.raw_displacement_mm());
  }

  json resolved = {{"pp_threshold", tracker_cfg.levd.pp_threshold},
                   {"one_euro_min_cutoff_hz", tracker_cfg.euro.min_cutoff},
                   {"one_euro_beta", tracker_cfg.euro.beta},
                   {"window_s", tracker_cfg.window_s},
                   {"input", fs::path(input).filename().string()}};
  sonar::ReportMeta meta{1, c.seed_given ? c.seed : 0, sonar::hash_hex(resolved.dump())};

  ensure_out(c);
  std::string csv = sonar::meta_comment(meta);
  csv += "time_s,position_mm,velocity_mm_s,quality,raw_mm\n";
  for (std::size_t i = 0; i < track.size(); ++i) {
    const auto& cs = track[i];
    csv += sonar::fmt_num(cs.time_s) + "," + sonar::fmt_num(cs.position_mm) + "," +
           sonar::fmt_num(cs.velocity_mm_s) + "," + sonar::fmt_num(cs.quality) + "," +
           sonar::fmt_num(raw[i]) + "\n";
  }
  sonar::write_text_file(out_path(c, "cursor.csv"), csv);

  if (c.plot) {
    sonar::SvgSeries smooth{"smoothed", {}};
    sonar::SvgSeries rough{"raw", {}};
    for (std::size_t i = 0; i < track.size(); ++i) {
      smooth.points.push_back({track[i].time_s, track[i].position_mm});
      rough.points.push_back({track[i].time_s, raw[i]});
    }
    sonar::write_text_file(out_path(c, "track.svg"),
                           sonar::svg_line_chart("Tracked displacement", "time (s)",
                                                 "displacement (mm)", {rough, smooth}));
  }
  std::printf("track: %zu frames -> %s\n", track.size(), c.out_dir.c_str());
  return 0;
}

// --- fitts / multi -------------------------------------------------------------

struct StudyRun {
  int study = 1;
  std::vector<sonar::Method> methods;
  std::vector<bool> haptics;
  std::vector<std::uint64_t> seeds;
  bool pipeline = false;
  sonar::AgentParams agent;
  int blocks = 0;  // 0 = protocol default
  std::vector<double> sweep_offsets;  // empty = no sweep
};

std::vector<sonar::TaskSpec> protocol_for(const StudyRun& r, std::uint64_t seed) {
  if (r.study == 1) {
    sonar::Study1Config cfg;
    cfg.seed = seed;
    if (r.blocks > 0) cfg.blocks = r.blocks;
    return sonar::make_study1_protocol(cfg);
  }
  sonar::Study2Config cfg;
  cfg.seed = seed;
  if (r.blocks > 0) cfg.blocks = r.blocks;
  return sonar::make_study2_protocol(cfg);
}

std::uint64_t run_seed_for(std::uint64_t seed, sonar::Method m, bool haptic) {
  const std::string tag = std::to_string(seed) + "|" + sonar::to_string(m) + (haptic ? "|h" : "");
  return sonar::fnv1a64(tag);
}

int cmd_selection_study(const Common& c, int default_study, const char* prefix,
                        std::vector<std::string> default_methods,
                        std::vector<bool> default_haptics) {
  const json j = maybe_config(c);
  StudyRun r;
  r.study = static_cast<int>(jget(j, "study", default_study));
  std::vector<std::string> method_names = default_methods;
  if (j.contains("methods")) method_names = j.at("methods").get<std::vector<std::string>>();
  for (const auto& m : method_names) r.methods.push_back(parse_method(m));
  if (j.contains("haptics")) r.haptics = j.at("haptics").get<std::vector<bool>>();
  else r.haptics = default_haptics;
  if (j.contains("seeds")) r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  else if (j.contains("seed")) r.seeds = {j.at("seed").get<std::uint64_t>()};
  else r.seeds = {7};
  if (c.seed_given) r.seeds = {c.seed};
  r.pipeline = j.contains("pipeline") && j.at("pipeline").get<bool>();
  r.blocks = static_cast<int>(jget(j, "blocks", 0));
  if (j.contains("agent")) apply_agent_overrides(r.agent, j.at("agent"));
  if (j.contains("offset_sweep")) {
    const json& s = j.at("offset_sweep");
    if (s.is_boolean() && s.get<bool>()) r.sweep_offsets = {0, 40, 80, 120, 160, 200};
    else if (s.is_object() && s.contains("offsets_ms"))
      r.sweep_offsets = s.at("offsets_ms").get<std::vector<double>>();
    else if (s.is_array())
      r.sweep_offsets = s.get<std::vector<double>>();
  }

  json resolved = {{"study", r.study},           {"methods", method_names},
                   {"haptics", r.haptics},       {"seeds", r.seeds},
                   {"pipeline", r.pipeline},     {"blocks", r.blocks},
                   {"agent", agent_to_json(r.agent)},
                   {"offset_sweep", r.sweep_offsets}};
  sonar::ReportMeta meta{1, r.seeds.front(), sonar::hash_hex(resolved.dump())};

  // run all conditions
  std::vector<sonar::TrialRecord> all;
  for (std::uint64_t seed : r.seeds) {
    const auto specs = protocol_for(r, seed);
    for (sonar::Method m : r.methods)
      for (bool h : r.haptics) {
        sonar::RunConfig rc;
        rc.method = m;
        rc.haptics = h;
        rc.agent = r.agent;
        rc.full_pipeline = r.pipeline;
        auto records = sonar::run_protocol(specs, rc, run_seed_for(seed, m, h), c.threads);
        for (auto& rec : records) all.push_back(std::move(rec));
      }
  }
  const sonar::FittsSummary summary = sonar::summarize(all);

  ensure_out(c);
  // per-selection rows
  std::string sel = sonar::meta_comment(meta);
  sel += "study,method,haptics,seed,trial_index,block,practice,width_mm,amplitude_mm,goal_id,"
         "prev_mm,endpoint_mm,t_start_s,t_select_s,mt_s,error,missing,re_entries\n";
  for (const auto& rec : all)
    for (const auto& s : rec.selections) {
      sel += std::to_string(rec.spec.study) + "," + sonar::to_string(rec.method) + "," +
             (rec.haptics ? "1" : "0") + "," + std::to_string(rec.seed) + "," +
             std::to_string(rec.spec.trial_index) + "," + std::to_string(rec.spec.block) + "," +
             (rec.spec.practice ? "1" : "0") + "," + sonar::fmt_num(rec.spec.width_mm) + "," +
             sonar::fmt_num(rec.spec.amplitude_mm) + "," + std::to_string(s.goal_id) + "," +
             sonar::fmt_num(s.prev_mm) + "," + sonar::fmt_num(s.endpoint_mm) + "," +
             sonar::fmt_num(s.t_start) + "," + sonar::fmt_num(s.t_select) + "," +
             sonar::fmt_num(s.t_select - s.t_start) + "," + (s.error ? "1" : "0") + "," +
             (s.missing ? "1" : "0") + "," + std::to_string(s.re_entries) + "\n";
    }
  sonar::write_text_file(out_path(c, std::string(prefix) + "_selections.csv"), sel);

  // per-cell and per-method aggregates
  std::string cells = sonar::meta_comment(meta);
  cells += "study,method,haptics,width_mm,amplitude_mm,selections,trials,errors,missing,a_e_mm,"
           "w_e_mm,w_e_floored,id_e_bits,mt_mean_s,tp_bps,er_pct,tre_per_trial\n";
  std::string methods = sonar::meta_comment(meta);
  methods += "study,method,haptics,selections,trials,errors,missing,tp_mean_of_means_bps,"
             "tp_pooled_bps,mt_mean_s,er_pct,tre_per_trial,fit_a_s,fit_b_s_per_bit,fit_r2,"
             "peak_cell_w_mm,peak_cell_a_mm,peak_cell_tp_bps,peak_cell_er_pct\n";
  json jgroups = json::array();
  for (const auto& g : summary.groups) {
    json jcells = json::array();
    const sonar::ConditionStats* peak = nullptr;
    for (const auto& cc : g.cells) {
      if (cc.er_pct <= g.er_pct + 1e-9 && (!peak || cc.tp > peak->tp)) peak = &cc;
      cells += std::to_string(g.study) + "," + sonar::to_string(g.method) + "," +
               (g.haptics ? "1" : "0") + "," + sonar::fmt_num(cc.width_mm) + "," +
               sonar::fmt_num(cc.amplitude_mm) + "," + std::to_string(cc.selections) + "," +
               std::to_string(cc.trials) + "," + std::to_string(cc.errors) + "," +
               std::to_string(cc.missing) + "," + sonar::fmt_num(cc.a_e) + "," +
               sonar::fmt_num(cc.w_e) + "," + (cc.w_e_floored ? "1" : "0") + "," +
               sonar::fmt_num(cc.id_e) + "," + sonar::fmt_num(cc.mt_mean) + "," +
               sonar::fmt_num(cc.tp) + "," + sonar::fmt_num(cc.er_pct) + "," +
               sonar::fmt_num(cc.tre_per_trial) + "\n";
      jcells.push_back({{"width_mm", cc.width_mm},
                        {"amplitude_mm", cc.amplitude_mm},
                        {"selections", cc.selections},
                        {"trials", cc.trials},
                        {"errors", cc.errors},
                        {"missing", cc.missing},
                        {"a_e_mm", cc.a_e},
                        {"w_e_mm", cc.w_e},
                        {"w_e_floored", cc.w_e_floored},
                        {"id_e_bits", cc.id_e},
                        {"mt_mean_s", cc.mt_mean},
                        {"tp_bps", cc.tp},
                        {"er_pct", cc.er_pct},
                        {"tre_per_trial", cc.tre_per_trial}});
    }
    if (!peak && !g.cells.empty()) peak = &g.cells.front();
    methods += std::to_string(g.study) + "," + sonar::to_string(g.method) + "," +
               (g.haptics ? "1" : "0") + "," + std::to_string(g.selections) + "," +
               std::to_string(g.trials) + "," + std::to_string(g.errors) + "," +
               std::to_string(g.missing) + "," + sonar::fmt_num(g.tp_mean_of_means) + "," +
               sonar::fmt_num(g.tp_pooled) + "," + sonar::fmt_num(g.mt_mean) + "," +
               sonar::fmt_num(g.er_pct) + "," + sonar::fmt_num(g.tre_per_trial) + ",";
    if (g.fit)
      methods += sonar::fmt_num(g.fit->a) + "," + sonar::fmt_num(g.fit->b) + "," +
                 sonar::fmt_num(g.fit->r2);
    else
      methods += ",,";
    if (peak)
      methods += "," + sonar::fmt_num(peak->width_mm) + "," + sonar::fmt_num(peak->amplitude_mm) +
                 "," + sonar::fmt_num(peak->tp) + "," + sonar::fmt_num(peak->er_pct);
    else
      methods += ",,,,";
    methods += "\n";

    json jg = {{"study", g.study},
               {"method", sonar::to_string(g.method)},
               {"haptics", g.haptics},
               {"selections", g.selections},
               {"trials", g.trials},
               {"errors", g.errors},
               {"missing", g.missing},
               // ISO-style mean of per-(W,A) cell throughputs; the pooled
               // bits-over-time variant is reported alongside.
               {"tp_mean_of_means_bps", g.tp_mean_of_means},
               {"tp_pooled_bps", g.tp_pooled},
               {"mt_mean_s", g.mt_mean},
               {"er_pct", g.er_pct},
               {"tre_per_trial", g.tre_per_trial},
               {"cells", jcells}};
    if (g.fit) jg["fit"] = {{"a_s", g.fit->a}, {"b_s_per_bit", g.fit->b}, {"r2", g.fit->r2}};
    else jg["fit"] = nullptr;
    if (peak)
      jg["peak_cell"] = {{"width_mm", peak->width_mm},
                         {"amplitude_mm", peak->amplitude_mm},
                         {"tp_bps", peak->tp},
                         {"er_pct", peak->er_pct}};
    jgroups.push_back(std::move(jg));
  }
  sonar::write_text_file(out_path(c, std::string(prefix) + "_cells.csv"), cells);
  sonar::write_text_file(out_path(c, std::string(prefix) + "_methods.csv"), methods);

  json jsum = {{"schema_version", 1},
               {"seed", meta.seed},
               {"config_hash", meta.config_hash},
               {"config", resolved},
               {"groups", jgroups}};

  // optional pinch temporal-offset sweep
  if (!r.sweep_offsets.empty()) {
    std::vector<sonar::TaskSpec> sweep_specs;
    for (std::uint64_t seed : r.seeds) {
      auto specs = protocol_for(r, seed);
      for (auto& s : specs) {
        s.trial_index += static_cast<int>(sweep_specs.size());
        sweep_specs.push_back(std::move(s));
      }
    }
    sonar::RunConfig rc;
    rc.method = sonar::Method::kPinch;
    rc.agent = r.agent;
    rc.full_pipeline = r.pipeline;
    const auto sweep = sonar::run_offset_sweep(sweep_specs, rc,
                                               run_seed_for(r.seeds.front(), rc.method, false),
                                               r.sweep_offsets, c.threads);
    std::string sweep_csv = sonar::meta_comment(meta);
    sweep_csv += "# baseline_er_pct=" + sonar::fmt_num(sweep.baseline_er_pct) + "\n";
    if (sweep.has_crossover)
      sweep_csv += "# crossover_ms=[" + sonar::fmt_num(sweep.crossover_lo_ms) + "," +
                   sonar::fmt_num(sweep.crossover_hi_ms) + "]\n";
    else
      sweep_csv += "# crossover_ms=none\n";
    sweep_csv += "offset_ms,er_pct,corrected_pp,premature_pp\n";
    for (const auto& pt : sweep.points)
      sweep_csv += sonar::fmt_num(pt.offset_ms) + "," + sonar::fmt_num(pt.er_pct) + "," +
                   sonar::fmt_num(pt.corrected_pp) + "," + sonar::fmt_num(pt.premature_pp) + "\n";
    sonar::write_text_file(out_path(c, std::string(prefix) + "_offset_sweep.csv"), sweep_csv);

    json jsweep = {{"baseline_er_pct", sweep.baseline_er_pct},
                   {"has_crossover", sweep.has_crossover},
                   {"points", json::array()}};
    if (sweep.has_crossover)
      jsweep["crossover_ms"] = {sweep.crossover_lo_ms, sweep.crossover_hi_ms};
    for (const auto& pt : sweep.points)
      jsweep["points"].push_back({{"offset_ms", pt.offset_ms},
                                  {"er_pct", pt.er_pct},
                                  {"corrected_pp", pt.corrected_pp},
                                  {"premature_pp", pt.premature_pp}});
    jsum["offset_sweep"] = std::move(jsweep);

    if (c.plot) {
      sonar::SvgSeries corr{"corrected (pp)", {}}, prem{"premature (pp)", {}};
      for (const auto& pt : sweep.points) {
        corr.points.push_back({pt.offset_ms, pt.corrected_pp});
        prem.points.push_back({pt.offset_ms, pt.premature_pp});
      }
      sonar::write_text_file(
          out_path(c, std::string(prefix) + "_offset_sweep.svg"),
          sonar::svg_line_chart("Pinch trigger offset sweep", "offset (ms)",
                                "percentage points of selections", {corr, prem}));
    }
  }

  sonar::write_text_file(out_path(c, std::string(prefix) + "_summary.json"),
                         jsum.dump(2) + "\n");

  if (c.plot) {
    std::vector<std::string> group_labels;
    sonar::SvgBarSeries tp_mm{"mean of means", {}}, tp_pool{"pooled", {}};
    sonar::SvgBarSeries mt{"MT (s)", {}}, er{"ER (%)", {}};
    for (const auto& g : summary.groups) {
      group_labels.push_back(std::string(sonar::to_string(g.method)) + (g.haptics ? "+h" : ""));
      tp_mm.values.push_back(g.tp_mean_of_means);
      tp_pool.values.push_back(g.tp_pooled);
      mt.values.push_back(g.mt_mean);
      er.values.push_back(g.er_pct);
    }
    sonar::write_text_file(out_path(c, std::string(prefix) + "_tp.svg"),
                           sonar::svg_grouped_bars("Throughput", "bits/s", group_labels,
                                                   {tp_mm, tp_pool}));
    sonar::write_text_file(out_path(c, std::string(prefix) + "_mt.svg"),
                           sonar::svg_grouped_bars("Movement time", "s", group_labels, {mt}));
    sonar::write_text_file(out_path(c, std::string(prefix) + "_er.svg"),
                           sonar::svg_grouped_bars("Error rate", "%", group_labels, {er}));
    for (const auto& g : summary.groups) {
      if (!g.fit) continue;
      std::vector<std::pair<double, double>> pts;
      for (const auto& cc : g.cells) pts.push_back({cc.id_e, cc.mt_mean});
      const std::string name = std::string(prefix) + "_fit_" + sonar::to_string(g.method) +
                               (g.haptics ? "_h" : "") + ".svg";
      sonar::write_text_file(out_path(c, name),
                             sonar::svg_scatter_fit("Movement model: " +
                                                        std::string(sonar::to_string(g.method)),
                                                    "ID_e (bits)", "MT (s)", pts, g.fit->a,
                                                    g.fit->b));
    }
  }
  std::printf("%s: %zu trials, %zu groups -> %s\n", prefix, all.size(), summary.groups.size(),
              c.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D around-device sonar cursor: simulation, tracking and selection studies"};
  app.require_subcommand(1);

  Common c;
  std::string track_input;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", c.config_path, "JSON config file");
    sub->add_option("--out", c.out_dir, "output directory");
    sub->add_option("--seed", c.seed, "seed override")->each([&](const std::string&) {
      c.seed_given = true;
    });
    sub->add_flag("--plot", c.plot, "emit SVG plots");
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* sub_syseval =
      app.add_subcommand("syseval", "staged displacement accuracy batch");
  add_common(sub_syseval);
  auto* sub_simulate =
      app.add_subcommand("simulate", "synthesize a scene to WAV + truth CSV");
  add_common(sub_simulate);
  auto* sub_track = app.add_subcommand("track", "track a WAV into a cursor CSV");
  add_common(sub_track);
  sub_track->add_option("input", track_input, "input WAV file")->required();
  auto* sub_fitts =
      app.add_subcommand("fitts", "binary serial selection study with the scripted agent");
  add_common(sub_fitts);
  auto* sub_multi =
      app.add_subcommand("multi", "multi-target selection study with the scripted agent");
  add_common(sub_multi);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sub_syseval->parsed()) return cmd_syseval(c);
    if (sub_simulate->parsed()) return cmd_simulate(c);
    if (sub_track->parsed()) return cmd_track(c, track_input);
    if (sub_fitts->parsed())
      return cmd_selection_study(c, 1, "fitts", {"double_crossing", "dwell", "pinch"}, {false});
    if (sub_multi->parsed())
      return cmd_selection_study(c, 2, "multi", {"double_crossing", "dwell"}, {false, true});
  } catch (const sonar::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const sonar::ContractViolation& e) {
    std::fprintf(stderr, "contract violation: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
