#include "nlos/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "nlos/detect.hpp"
#include "nlos/dsp.hpp"
#include "nlos/fmcw.hpp"
#include "nlos/io_util.hpp"
#include "nlos/plot.hpp"
#include "nlos/pointcloud_io.hpp"
#include "nlos/reconstruction.hpp"
#include "nlos/scene_io.hpp"
#include "nlos/track.hpp"
#include "nlos/wall_estimation.hpp"

namespace nlos {

namespace {

std::filesystem::path numbered(const std::filesystem::path& dir,
                               const char* stem, std::size_t frame,
                               const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu%s", stem, frame, ext);
  return dir / buf;
}

double toc(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

template <typename F>
void timed(std::vector<StageTiming>& timings, const char* name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  body();
  timings.push_back({name, toc(t0)});
}

std::vector<FrameGroundTruth> load_gt(const std::filesystem::path& run_dir) {
  return load_ground_truth((run_dir / "ground_truth.ndjson").string());
}

void write_manifest(const ResolvedScenario& rs, const PipelineOptions& opts,
                    const std::filesystem::path& run_dir,
                    const SimulateStats& stats, bool has_metrics) {
  Json j;
  j["format"] = "nlos_manifest";
  j["version"] = 1;
  j["scenario"] = rs.scenario.name;
  j["scenario_file"] = opts.scenario_path.string();
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(scenario_hash(rs.scenario)));
  j["scenario_hash"] = hash;
  j["seed"] = rs.scenario.rng_seed;
  j["frames"] = rs.scenario.frames.count;
  Json o;
  o["suppress_static"] = rs.processing.dsp.suppress_static;
  o["use_velocity"] = opts.use_velocity;
  o["split_visibility"] = opts.split_visibility;
  j["options"] = std::move(o);
  Json pts;
  pts["total"] = stats.total_points;
  pts["max_per_frame"] = stats.max_points_per_frame;
  j["points"] = std::move(pts);
  Json a;
  a["scenario"] = "scenario.json";
  a["pointclouds"] = "pointclouds";
  a["walls"] = "walls.csv";
  a["ground_truth"] = "ground_truth.ndjson";
  if (has_metrics) {
    a["reconstructions"] = "reconstructions";
    a["detections"] = "detections.ndjson";
    a["tracks"] = "tracks.ndjson";
    a["metrics"] = "metrics.json";
    a["report"] = "metrics.md";
    if (opts.write_plots) a["plots"] = "plots";
  }
  j["artifacts"] = std::move(a);
  write_text_file(run_dir / "manifest.json", j.dump(2) + "\n");
}

void write_timings(const std::filesystem::path& run_dir,
                   const std::vector<StageTiming>& timings) {
  // Kept out of the manifest: everything else in the run directory is a
  // pure function of scenario and seed, timings are not.
  Json j;
  j["format"] = "nlos_timings";
  j["version"] = 1;
  j["unit"] = "ms";
  Json list = Json::array();
  double total = 0.0;
  for (const StageTiming& t : timings) {
    Json row;
    row["stage"] = t.stage;
    row["ms"] = t.milliseconds;
    list.push_back(std::move(row));
    total += t.milliseconds;
  }
  j["stages"] = std::move(list);
  j["total_ms"] = total;
  write_text_file(run_dir / "timings.json", j.dump(2) + "\n");
}

std::map<std::size_t, std::vector<BoxRecord>> by_frame(
    const std::vector<BoxRecord>& records) {
  std::map<std::size_t, std::vector<BoxRecord>> out;
  for (const BoxRecord& r : records) out[r.frame].push_back(r);
  return out;
}

}  // namespace

std::filesystem::path cloud_path(const std::filesystem::path& run_dir,
                                 std::size_t frame) {
  return numbered(run_dir / "pointclouds", "frame", frame, ".csv");
}

std::filesystem::path recon_path(const std::filesystem::path& run_dir,
                                 std::size_t frame) {
  return numbered(run_dir / "reconstructions", "frame", frame, ".ndjson");
}

std::filesystem::path plot_path(const std::filesystem::path& run_dir,
                                std::size_t frame) {
  return numbered(run_dir / "plots", "frame", frame, ".svg");
}

ResolvedScenario resolve_scenario(const PipelineOptions& opts) {
  if (opts.scenario_path.empty())
    throw std::invalid_argument("no scenario file given");
  const std::string text = read_text_file(opts.scenario_path);
  const Json doc = parse_json_text(text, opts.scenario_path.string());
  ResolvedScenario rs;
  rs.scenario = scenario_from_json(doc);
  if (doc.contains("processing"))
    rs.processing = processing_from_json(doc.at("processing"));
  if (opts.seed) rs.scenario.rng_seed = *opts.seed;
  if (opts.frames) {
    if (*opts.frames <= 0) throw std::invalid_argument("frame count must be positive");
    rs.scenario.frames.count = *opts.frames;
  }
  if (opts.suppress_static)
    rs.processing.dsp.suppress_static = *opts.suppress_static;
  const auto report = rs.scenario.validate();
  if (!report.ok())
    throw std::runtime_error(opts.scenario_path.string() + ": " +
                             report.errors.front());
  return rs;
}

SimulateStats stage_simulate(const ResolvedScenario& rs,
                             const std::filesystem::path& run_dir,
                             bool write_raw) {
  const Scenario& sc = rs.scenario;
  std::filesystem::create_directories(run_dir / "pointclouds");
  if (write_raw) std::filesystem::create_directories(run_dir / "raw");
  SimulateStats stats;
  for (int k = 0; k < sc.frames.count; ++k) {
    const RawFrame frame = synthesize_frame(sc, k);
    const RadarCube cube = transform(frame, sc.sensor, rs.processing.dsp);
    PointCloud cloud = cfar_detect(cube, rs.processing.dsp);
    cloud.timestamp = sc.frames.time_of(k);
    save_pointcloud_csv(cloud_path(run_dir, static_cast<std::size_t>(k)), cloud);
    stats.total_points += cloud.points.size();
    stats.max_points_per_frame =
        std::max(stats.max_points_per_frame, cloud.points.size());
    if (write_raw)
      dump_raw_frames(numbered(run_dir / "raw", "frame", k, ".bin"), {frame},
                      scenario_hash(sc));
  }
  return stats;
}

void stage_walls(const Scenario& scenario,
                 const std::filesystem::path& run_dir) {
  // The wall map is a static prior from a survey sweep, not a radar product:
  // sampled off the true layout with a little measurement noise.
  const LidarBev bev = sample_wall_bev(scenario, 0.01, 0.01);
  const auto walls = estimate_walls(bev, scenario.sensor_pose.position);
  if (walls.empty())
    throw std::runtime_error("wall estimation found nothing to relay off");
  save_walls_csv((run_dir / "walls.csv").string(), walls);
}

void stage_ground_truth(const Scenario& scenario,
                        const std::filesystem::path& run_dir) {
  save_ground_truth((run_dir / "ground_truth.ndjson").string(),
                    make_ground_truth(scenario));
}

void stage_reconstruct(const ResolvedScenario& rs,
                       const std::filesystem::path& run_dir) {
  const Scenario& sc = rs.scenario;
  const auto walls = load_walls_csv((run_dir / "walls.csv").string());
  std::filesystem::create_directories(run_dir / "reconstructions");
  for (int k = 0; k < sc.frames.count; ++k) {
    const auto frame = static_cast<std::size_t>(k);
    const PointCloud cloud = load_pointcloud_csv(cloud_path(run_dir, frame));
    auto recons =
        reconstruct_frame(cloud, sc.sensor_pose, sc.ego_velocity, walls);
    if (rs.processing.dsp.suppress_static) {
      // Doppler suppression happens in the measured domain; with a rolling
      // platform the static world only becomes zero-velocity after ego
      // compensation, so it is filtered again here.
      std::erase_if(recons, [&](const NlosReconstruction& r) {
        return r.velocity_valid() &&
               r.v.norm() < sc.sensor.velocity_resolution;
      });
    }
    save_reconstructions(recon_path(run_dir, frame).string(), frame,
                         cloud.timestamp, recons);
  }
}

void stage_detect(const ResolvedScenario& rs,
                  const std::filesystem::path& run_dir, bool use_velocity) {
  const Scenario& sc = rs.scenario;
  std::vector<BoxRecord> records;
  for (int k = 0; k < sc.frames.count; ++k) {
    const auto frame = static_cast<std::size_t>(k);
    const ReconstructionFrame rf =
        load_reconstructions(recon_path(run_dir, frame).string());
    for (OrientedBox box : detect(rf.recons, rs.processing.detect)) {
      if (!use_velocity) box.velocity_measured = false;
      BoxRecord r;
      r.frame = frame;
      r.timestamp = rf.timestamp;
      r.id = -1;
      r.box = box;
      records.push_back(std::move(r));
    }
  }
  save_box_records((run_dir / "detections.ndjson").string(), records);
}

void stage_track(const ResolvedScenario& rs,
                 const std::filesystem::path& run_dir, bool use_velocity) {
  const Scenario& sc = rs.scenario;
  const auto detections =
      by_frame(load_box_records((run_dir / "detections.ndjson").string()));
  TrackerParams params;
  params.fuse_velocity = use_velocity;
  Tracker tracker(params);
  std::vector<BoxRecord> records;
  for (int k = 0; k < sc.frames.count; ++k) {
    const auto frame = static_cast<std::size_t>(k);
    std::vector<OrientedBox> boxes;
    if (const auto it = detections.find(frame); it != detections.end())
      for (const BoxRecord& r : it->second) boxes.push_back(r.box);
    for (const Track& t : tracker.update(boxes, sc.frames.interval)) {
      if (!t.reported) continue;
      BoxRecord r;
      r.frame = frame;
      r.timestamp = sc.frames.time_of(k);
      r.id = t.id;
      r.box = t.current;
      records.push_back(std::move(r));
    }
  }
  save_box_records((run_dir / "tracks.ndjson").string(), records);
}

MetricsReport stage_eval(const std::filesystem::path& run_dir,
                         bool use_velocity, bool split_visibility) {
  const auto detections =
      load_box_records((run_dir / "detections.ndjson").string());
  const auto tracks = load_box_records((run_dir / "tracks.ndjson").string());
  const auto gts = load_gt(run_dir);
  MetricsParams params;
  params.label = use_velocity ? "tracking" : "tracking w/o velocity";
  const MetricsReport report = compute_metrics(detections, tracks, gts, params);
  write_text_file(run_dir / "metrics.json", metrics_to_json(report));
  write_text_file(run_dir / "metrics.md",
                  metrics_to_markdown(report, split_visibility));
  return report;
}

void stage_plots(const ResolvedScenario& rs,
                 const std::filesystem::path& run_dir) {
  const Scenario& sc = rs.scenario;
  const auto walls = load_walls_csv((run_dir / "walls.csv").string());
  const auto tracks = by_frame(load_box_records((run_dir / "tracks.ndjson").string()));
  const auto gts = load_gt(run_dir);
  std::filesystem::create_directories(run_dir / "plots");
  for (int k = 0; k < sc.frames.count; ++k) {
    const auto frame = static_cast<std::size_t>(k);
    const PointCloud cloud = load_pointcloud_csv(cloud_path(run_dir, frame));
    const ReconstructionFrame rf =
        load_reconstructions(recon_path(run_dir, frame).string());
    static const std::vector<BoxRecord> no_tracks;
    const auto it = tracks.find(frame);
    const std::vector<GtBox>& gt_boxes =
        frame < gts.size() ? gts[frame].boxes : gts.back().boxes;
    write_text_file(
        plot_path(run_dir, frame),
        render_frame_svg(sc, walls, cloud, sc.sensor_pose, rf.recons,
                         it == tracks.end() ? no_tracks : it->second, gt_boxes,
                         frame));
  }
}

namespace {

PipelineResult run_common(const PipelineOptions& opts, bool full) {
  const ResolvedScenario rs = resolve_scenario(opts);
  if (opts.out_dir.empty()) throw std::invalid_argument("no output directory given");
  std::filesystem::create_directories(opts.out_dir);

  // Self-contained snapshot of what this run actually used.
  Json snapshot = scenario_to_json(rs.scenario);
  snapshot["processing"] = processing_to_json(rs.processing);
  write_text_file(opts.out_dir / "scenario.json", snapshot.dump(2) + "\n");

  PipelineResult result;
  result.run_dir = opts.out_dir;
  result.frames = static_cast<std::size_t>(rs.scenario.frames.count);
  timed(result.timings, "simulate", [&] {
    result.points = stage_simulate(rs, opts.out_dir, opts.write_raw);
  });
  timed(result.timings, "walls", [&] { stage_walls(rs.scenario, opts.out_dir); });
  timed(result.timings, "ground_truth",
        [&] { stage_ground_truth(rs.scenario, opts.out_dir); });
  if (full) {
    timed(result.timings, "reconstruct",
          [&] { stage_reconstruct(rs, opts.out_dir); });
    timed(result.timings, "detect",
          [&] { stage_detect(rs, opts.out_dir, opts.use_velocity); });
    timed(result.timings, "track",
          [&] { stage_track(rs, opts.out_dir, opts.use_velocity); });
    timed(result.timings, "eval", [&] {
      result.metrics =
          stage_eval(opts.out_dir, opts.use_velocity, opts.split_visibility);
    });
    if (opts.write_plots)
      timed(result.timings, "plots", [&] { stage_plots(rs, opts.out_dir); });
  }
  write_manifest(rs, opts, opts.out_dir, result.points, full);
  write_timings(opts.out_dir, result.timings);
  return result;
}

}  // namespace

PipelineResult run_simulate(const PipelineOptions& opts) {
  return run_common(opts, false);
}

PipelineResult run_pipeline(const PipelineOptions& opts) {
  return run_common(opts, true);
}

MetricsReport run_eval(const std::filesystem::path& run_dir,
                       bool use_velocity, bool split_visibility) {
  if (!std::filesystem::exists(run_dir / "detections.ndjson"))
    throw std::runtime_error(run_dir.string() +
                             ": not a completed pipeline run directory");
  return stage_eval(run_dir, use_velocity, split_visibility);
}

SuiteRunResult run_suite(const std::filesystem::path& out_dir,
                         PipelineOptions base, bool run) {
  SuiteRunResult result;
  result.scenario_dir = out_dir / "scenarios";
  result.runs_dir = out_dir / "runs";
  const auto files = write_suite(result.scenario_dir);
  if (!run) return result;

  for (const auto& file : files) {
    PipelineOptions opts = base;
    opts.scenario_path = file;
    opts.out_dir = result.runs_dir / file.stem();
    result.runs.emplace_back(file.stem().string(), run_pipeline(opts));
  }

  Json summary;
  summary["format"] = "nlos_suite_summary";
  summary["version"] = 1;
  Json rows = Json::array();
  std::string md =
      "| Scenario | Frames | Points | AP@0.5 | Trk MAE (m) | MOTA | MOTA "
      "nlos | MOTA los | IDSW |\n|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& [name, res] : result.runs) {
    const MetricsReport& m = res.metrics;
    Json row;
    row["name"] = name;
    row["frames"] = res.frames;
    row["points"] = res.points.total_points;
    row["metrics"] = Json::parse(metrics_to_json(m));
    rows.push_back(std::move(row));
    char line[256];
    std::snprintf(line, sizeof line,
                  "| %s | %zu | %zu | %.1f | %.2f | %.2f | %.2f | %.2f | %zu |\n",
                  name.c_str(), res.frames, res.points.total_points,
                  m.ap.empty() ? 0.0 : m.ap.front().second.front(),
                  m.all.trk_loc.mae, m.all.mot.mota, m.nlos.mot.mota,
                  m.los.mot.mota, m.all.mot.id_switches);
    md += line;
  }
  summary["runs"] = std::move(rows);
  write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");
  write_text_file(out_dir / "summary.md", md);
  return result;
}

}  // namespace nlos
