#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>

#include "radtrack/error.hpp"
#include "radtrack/io.hpp"
#include "radtrack/metrics.hpp"
#include "radtrack/oracle.hpp"
#include "radtrack/parallel.hpp"
#include "radtrack/simulator.hpp"
#include "radtrack/tracker.hpp"

namespace radtrack::cli {

namespace fs = std::filesystem;

namespace {

fs::path resolve_config(const std::string& name) {
  fs::path p(name);
  if (fs::exists(p) || p.is_absolute()) return p;
  if (const char* dir = std::getenv(kConfigDirEnv); dir && *dir) {
    fs::path candidate = fs::path(dir) / p;
    if (fs::exists(candidate)) return candidate;
  }
  return p;
}

// Writes every file to a sibling temporary first and renames only after all
// writes succeeded.
void write_files_atomically(const std::vector<std::pair<fs::path, std::string>>& files) {
  std::vector<fs::path> tmps;
  try {
    for (const auto& [path, content] : files) {
      fs::path tmp = path;
      tmp += ".tmp";
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw InputError("cannot write " + tmp.string());
      tmps.push_back(tmp);
      out << content;
      out.close();
      if (!out) throw InputError("cannot write " + tmp.string());
    }
    for (std::size_t i = 0; i < files.size(); ++i) fs::rename(tmps[i], files[i].first);
  } catch (...) {
    std::error_code ec;
    for (const auto& t : tmps) fs::remove(t, ec);
    throw;
  }
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

// Tracker options shared by `track` and `sweep`.
struct TrackerFlags {
  std::string config;
  std::string scenario;
  std::optional<double> alpha, beta, delta, radius;
  std::optional<int> max_age;
  std::optional<double> min_confidence;
  std::optional<double> depth_tolerance;
  std::vector<double> pillar_dims;
  bool no_fusion = false;
  bool exclusive = false;

  void add_to(CLI::App* app, bool weights) {
    app->add_option("--config", config, "Tracker config (JSON)");
    app->add_option("--scenario", scenario, "Scenario config supplying the camera model");
    if (weights) {
      app->add_option("--alpha", alpha, "Pixel-term weight (default 1/radius^2)");
      app->add_option("--beta", beta, "Depth-term weight");
      app->add_option("--delta", delta, "Velocity-term weight");
      app->add_option("--radius", radius, "Gate radius in pixels");
    }
    app->add_option("--max-age", max_age, "Frames a track may stay unmatched");
    app->add_option("--min-confidence", min_confidence, "Detection confidence floor");
    app->add_option("--depth-tolerance", depth_tolerance, "Frustum depth window as a fraction");
    app->add_option("--pillar-dims", pillar_dims, "Pillar width_y,height_z,depth_x (m)")
        ->delimiter(',')
        ->expected(3);
    app->add_flag("--no-fusion", no_fusion, "Disable radar frustum fusion");
    app->add_flag("--exclusive", exclusive, "Each radar pillar serves at most one detection");
  }

  TrackerConfig build() const {
    TrackerConfig cfg;
    if (!scenario.empty())
      cfg.camera = io::scenario_from_json(io::read_json_file(resolve_config(scenario))).camera;
    bool alpha_from_file = false;
    if (!config.empty()) {
      const auto j = io::read_json_file(resolve_config(config));
      alpha_from_file = j.contains("alpha");
      cfg = io::tracker_config_from_json(j, cfg);
    }
    if (radius) cfg.weights.radius = *radius;
    if (alpha) {
      cfg.weights.alpha = *alpha;
    } else if (!alpha_from_file) {
      cfg.weights.alpha = 1.0 / (cfg.weights.radius * cfg.weights.radius);
    }
    if (beta) cfg.weights.beta = *beta;
    if (delta) cfg.weights.delta = *delta;
    if (max_age) cfg.max_age = *max_age;
    if (min_confidence) cfg.min_confidence = *min_confidence;
    if (depth_tolerance) cfg.fusion.depth_tolerance = *depth_tolerance;
    if (!pillar_dims.empty()) cfg.pillar_dims = {pillar_dims[0], pillar_dims[1], pillar_dims[2]};
    if (no_fusion) cfg.fusion_enabled = false;
    if (exclusive) cfg.fusion.exclusive = true;
    cfg.validate();
    return cfg;
  }
};

struct ProtocolFlags {
  int n = 40;
  double dist = 2.0;
  std::vector<std::string> classes;
  int threads = 1;

  void add_to(CLI::App* app) {
    app->add_option("--n", n, "Number of recall thresholds (n - 1 are evaluated)")->capture_default_str();
    app->add_option("--dist", dist, "Ground-plane match gate (m)")->capture_default_str();
    app->add_option("--classes", classes, "Restrict per-class rows, e.g. car,pedestrian")->delimiter(',');
    app->add_option("--threads", threads, "Worker threads")->capture_default_str();
  }

  metrics::Protocol build() const {
    metrics::Protocol p;
    p.n = n;
    p.dist_threshold = dist;
    p.threads = threads;
    if (!classes.empty()) {
      std::vector<int> ids;
      for (const auto& c : classes) {
        const auto id = metrics::class_from_name(c);
        if (!id) throw ConfigError("unknown class '" + c + "'");
        ids.push_back(*id);
      }
      p.classes = ids;
    }
    p.validate();
    return p;
  }
};

std::vector<FrameInput> frame_inputs(const std::vector<io::ReplayRecord>& records) {
  std::vector<FrameInput> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.to_frame_input());
  return out;
}

std::vector<metrics::PredFrame> pred_frames(const std::vector<FrameResult>& frames,
                                            const CameraModel& cam) {
  std::vector<metrics::PredFrame> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(io::ResultRecord::from(f, cam).to_pred_frame());
  return out;
}

void print_report(std::ostream& out, const metrics::MetricsReport& rep, std::size_t frames) {
  out << "n=" << rep.n << " dist=" << fmt(rep.dist_threshold, 2) << " frames=" << frames
      << " gt=" << rep.aggregate.num_gt << "\n";
  out << std::left << std::setw(12) << "class" << std::right;
  for (const char* h : {"AMOTA", "AMOTP", "MOTAR", "MOTA", "MOTP", "Recall"}) out << std::setw(9) << h;
  out << std::setw(6) << "IDS" << std::setw(8) << "GT" << "\n";
  auto row = [&](const std::string& name, const metrics::ClassReport& c) {
    out << std::left << std::setw(12) << name << std::right;
    for (double v : {c.amota, c.amotp, c.motar, c.mota, c.motp, c.recall}) out << std::setw(9) << fmt(v);
    out << std::setw(6) << c.ids << std::setw(8) << c.num_gt << "\n";
  };
  for (const auto& c : rep.classes) row(metrics::class_name(c.cls), c);
  row("overall", rep.aggregate);
}

io::json report_json(const metrics::MetricsReport& rep) {
  auto cls = [](const metrics::ClassReport& c) {
    io::json thresholds = io::json::array();
    for (const auto& t : c.thresholds) {
      thresholds.push_back({{"recall_threshold", t.recall_threshold},
                            {"confidence_floor", t.confidence_floor ? io::json(*t.confidence_floor) : io::json()},
                            {"achieved_recall", t.achieved_recall},
                            {"motar", t.motar},
                            {"motp", t.motp},
                            {"ids", t.ids},
                            {"fp", t.fp},
                            {"fn", t.fn}});
    }
    return io::json{{"class", c.cls < 0 ? std::string("overall") : metrics::class_name(c.cls)},
                    {"gt", c.num_gt},
                    {"amota", c.amota},
                    {"amotp", c.amotp},
                    {"motar", c.motar},
                    {"mota", c.mota},
                    {"motp", c.motp},
                    {"recall", c.recall},
                    {"ids", c.ids},
                    {"thresholds", std::move(thresholds)}};
  };
  io::json classes = io::json::array();
  for (const auto& c : rep.classes) classes.push_back(cls(c));
  return {{"n", rep.n}, {"dist_threshold", rep.dist_threshold}, {"classes", std::move(classes)},
          {"overall", cls(rep.aggregate)}};
}

int cmd_simulate(const std::string& config, std::optional<double> crossing, std::uint64_t seed,
                 bool seed_given, const std::string& out_prefix, std::ostream& out) {
  sim::ScenarioConfig cfg;
  if (!config.empty()) {
    if (crossing) throw ConfigError("give either --config or --crossing");
    auto j = io::read_json_file(resolve_config(config));
    if (seed_given) j["seed"] = seed;
    cfg = io::scenario_from_json(j);
  } else if (crossing) {
    cfg = sim::crossing_scenario(*crossing, seed);
  } else {
    throw ConfigError("simulate needs --config or --crossing");
  }
  const sim::Scene scene = sim::generate(cfg);

  std::ostringstream replay, gt;
  io::write_replay(replay, io::replay_of(scene));
  io::write_ground_truth(gt, io::ground_truth_of(scene));
  const fs::path replay_path = out_prefix + ".replay.jsonl";
  const fs::path gt_path = out_prefix + ".gt.jsonl";
  write_files_atomically({{replay_path, replay.str()}, {gt_path, gt.str()}});
  out << "wrote " << scene.frames.size() << " frames to " << replay_path.string() << " and "
      << gt_path.string() << "\n";
  return 0;
}

int cmd_track(const TrackerFlags& flags, const std::string& replay_path, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  const TrackerConfig cfg = flags.build();
  const auto records = io::read_replay_file(replay_path);
  const auto inputs = frame_inputs(records);
  const auto seq = run_sequence(inputs, cfg);

  std::vector<io::ResultRecord> results;
  results.reserve(seq.frames.size());
  for (const auto& f : seq.frames) results.push_back(io::ResultRecord::from(f, cfg.camera));
  std::ostringstream buf;
  io::write_results(buf, results);
  write_files_atomically({{out_path, buf.str()}});

  out << "tracked " << seq.frames.size() << " frames to " << out_path << "\n";
  err << "latency: frames=" << seq.latency.frames << " median_ms=" << fmt(seq.latency.median_ms, 4)
      << " p99_ms=" << fmt(seq.latency.p99_ms, 4) << " max_ms=" << fmt(seq.latency.max_ms, 4) << "\n";
  return 0;
}

int cmd_evaluate(const ProtocolFlags& pflags, const std::string& results_path, const std::string& gt_path,
                 const std::string& json_path, std::ostream& out) {
  const auto protocol = pflags.build();
  const auto results = io::read_results_file(results_path);
  const auto gt = io::read_ground_truth_file(gt_path);
  std::vector<metrics::PredFrame> preds;
  for (const auto& r : results) preds.push_back(r.to_pred_frame());
  const auto report = metrics::amota(preds, gt, protocol);
  print_report(out, report, gt.size());
  if (!json_path.empty()) write_files_atomically({{json_path, report_json(report).dump(2) + "\n"}});
  return 0;
}

struct SweepRow {
  CostWeights weights;
  double amota = 0.0;
  double mota = 0.0;
  std::size_t ids = 0;
  double cost_gap = 0.0;
};

int cmd_sweep(const TrackerFlags& tflags, const ProtocolFlags& pflags, const std::string& replay_path,
              const std::string& gt_path, std::vector<double> alphas, std::vector<double> betas,
              std::vector<double> deltas, std::vector<double> radii, const std::string& out_path,
              std::ostream& out) {
  const TrackerConfig base = tflags.build();
  metrics::Protocol protocol = pflags.build();
  const int threads = protocol.threads;
  protocol.threads = 1;

  if (betas.empty()) betas = {base.weights.beta};
  if (deltas.empty()) deltas = {base.weights.delta};
  if (radii.empty()) radii = {base.weights.radius};
  std::set<std::tuple<double, double, double, double>> grid;
  for (double r : radii) {
    const std::vector<double> as = alphas.empty() ? std::vector<double>{1.0 / (r * r)} : alphas;
    for (double a : as)
      for (double b : betas)
        for (double d : deltas) grid.emplace(a, b, d, r);
  }
  if (grid.empty()) throw ConfigError("sweep grid is empty");

  const auto inputs = frame_inputs(io::read_replay_file(replay_path));
  const auto gt = io::read_ground_truth_file(gt_path);
  const std::vector<std::tuple<double, double, double, double>> points(grid.begin(), grid.end());
  std::vector<SweepRow> rows(points.size());

  parallel_for(points.size(), threads, [&](std::size_t i) {
    TrackerConfig cfg = base;
    const auto& [a, b, d, r] = points[i];
    cfg.weights = {a, b, d, r};
    cfg.record_trace = true;
    cfg.validate();
    const auto seq = run_sequence(inputs, cfg);
    const auto report = metrics::amota(pred_frames(seq.frames, cfg.camera), gt, protocol);

    double gap = 0.0;
    for (const auto& tr : seq.traces) {
      const auto m = oracle::build_cost_matrix(tr.detections, tr.prior_tracks, cfg.weights);
      const auto pairs = oracle::greedy_pairs(tr.association, tr.prior_tracks);
      const auto best = oracle::min_cost_matching_of_size(m, pairs.size());
      gap += oracle::assignment_cost(m, pairs) - (best ? best->total_cost : 0.0);
    }
    rows[i] = {cfg.weights, report.aggregate.amota, report.aggregate.mota, report.aggregate.ids,
               seq.traces.empty() ? 0.0 : gap / static_cast<double>(seq.traces.size())};
  });

  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& x, const SweepRow& y) { return x.amota > y.amota; });

  std::ostringstream table;
  table << std::setw(12) << "alpha" << std::setw(10) << "beta" << std::setw(10) << "delta" << std::setw(10)
        << "radius" << std::setw(9) << "AMOTA" << std::setw(9) << "MOTA" << std::setw(6) << "IDS"
        << std::setw(12) << "cost_gap" << "\n";
  for (const auto& r : rows) {
    table << std::setw(12) << fmt(r.weights.alpha, 6) << std::setw(10) << fmt(r.weights.beta, 4)
          << std::setw(10) << fmt(r.weights.delta, 4) << std::setw(10) << fmt(r.weights.radius, 2)
          << std::setw(9) << fmt(r.amota) << std::setw(9) << fmt(r.mota) << std::setw(6) << r.ids
          << std::setw(12) << fmt(r.cost_gap, 6) << "\n";
  }
  out << table.str();
  if (!out_path.empty()) {
    std::ostringstream jl;
    for (const auto& r : rows)
      jl << io::json{{"alpha", r.weights.alpha}, {"beta", r.weights.beta}, {"delta", r.weights.delta},
                     {"radius", r.weights.radius}, {"amota", r.amota}, {"mota", r.mota},
                     {"ids", r.ids}, {"cost_gap", r.cost_gap}}
                .dump()
         << "\n";
    write_files_atomically({{out_path, jl.str()}});
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radar-camera fusion multi-object tracker"};
  app.require_subcommand(1);

  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic scene (replay + ground truth)");
  std::string sim_config, sim_out;
  std::optional<double> crossing;
  std::uint64_t seed = 0;
  sim_cmd->add_option("--config", sim_config, "Scenario config (JSON)");
  sim_cmd->add_option("--crossing", crossing, "Built-in crossing scenario with this depth gap (m)");
  auto* seed_opt = sim_cmd->add_option("--seed", seed, "Seed (overrides the config)");
  sim_cmd->add_option("--out", sim_out, "Output prefix")->required();

  auto* track_cmd = app.add_subcommand("track", "Run the tracker over a replay file");
  TrackerFlags track_flags;
  std::string track_replay, track_out;
  track_flags.add_to(track_cmd, true);
  track_cmd->add_option("--replay", track_replay, "Replay JSONL")->required();
  track_cmd->add_option("--out", track_out, "Result JSONL")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "Score tracker results against ground truth");
  ProtocolFlags eval_flags;
  std::string eval_results, eval_gt, eval_json;
  eval_flags.add_to(eval_cmd);
  eval_cmd->add_option("--results", eval_results, "Result JSONL")->required();
  eval_cmd->add_option("--gt", eval_gt, "Ground-truth JSONL")->required();
  eval_cmd->add_option("--json", eval_json, "Also write the report as JSON");

  auto* sweep_cmd = app.add_subcommand("sweep", "Grid search over association weights");
  TrackerFlags sweep_tflags;
  ProtocolFlags sweep_pflags;
  std::string sweep_replay, sweep_gt, sweep_out;
  std::vector<double> alphas, betas, deltas, radii;
  sweep_tflags.add_to(sweep_cmd, false);
  sweep_pflags.add_to(sweep_cmd);
  sweep_cmd->add_option("--replay", sweep_replay, "Replay JSONL")->required();
  sweep_cmd->add_option("--gt", sweep_gt, "Ground-truth JSONL")->required();
  sweep_cmd->add_option("--alpha", alphas, "Pixel weights (default 1/radius^2)")->delimiter(',');
  sweep_cmd->add_option("--beta", betas, "Depth weights")->delimiter(',');
  sweep_cmd->add_option("--delta", deltas, "Velocity weights")->delimiter(',');
  sweep_cmd->add_option("--radius", radii, "Gate radii (px)")->delimiter(',');
  sweep_cmd->add_option("--out", sweep_out, "Also write rows as JSONL");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (sim_cmd->parsed())
      return cmd_simulate(sim_config, crossing, seed, seed_opt->count() > 0, sim_out, out);
    if (track_cmd->parsed()) return cmd_track(track_flags, track_replay, track_out, out, err);
    if (eval_cmd->parsed()) return cmd_evaluate(eval_flags, eval_results, eval_gt, eval_json, out);
    if (sweep_cmd->parsed())
      return cmd_sweep(sweep_tflags, sweep_pflags, sweep_replay, sweep_gt, alphas, betas, deltas, radii,
                       sweep_out, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace radtrack::cli
