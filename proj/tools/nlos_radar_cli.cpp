// Command line front end. Subcommands map one-to-one onto the library entry
// points; all real work happens in nlos_core so scripted users and these
// commands share every code path.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "nlos/pipeline.hpp"

using namespace nlos;

namespace {

// One-line machine-readable record on stderr so callers can pattern-match
// failures without scraping prose.
int fail(const std::string& command, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = true;
  if (command.empty())
    j["command"] = nullptr;
  else
    j["command"] = command;
  j["message"] = message;
  std::fprintf(stderr, "%s\n", j.dump().c_str());
  return 1;
}

void print_metrics(const MetricsReport& m) {
  const double ap = m.ap.empty() ? 0.0 : m.ap.front().second.front();
  std::printf("  AP@0.5 %.1f  track MAE %.3f m\n", ap, m.all.trk_loc.mae);
  std::printf("  MOTA %.3f (nlos %.3f over %zu frames, los %.3f over %zu)\n",
              m.all.mot.mota, m.nlos.mot.mota, m.nlos_frames, m.los.mot.mota,
              m.los_frames);
  std::printf("  FP %zu  FN %zu  id switches %zu\n", m.all.mot.fp,
              m.all.mot.fn, m.all.mot.id_switches);
}

void print_run(const PipelineResult& r, bool with_metrics) {
  std::printf("run directory  %s\n", r.run_dir.string().c_str());
  std::printf("frames %zu  points %zu (max %zu per frame)\n", r.frames,
              r.points.total_points, r.points.max_points_per_frame);
  if (with_metrics) print_metrics(r.metrics);
  double total = 0.0;
  for (const StageTiming& t : r.timings) total += t.milliseconds;
  std::printf("elapsed %.0f ms\n", total);
}

struct CommonFlags {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> frames;
  bool suppress_static = false;
  bool no_velocity = false;
  bool split_visibility = false;
  bool raw = false;
  bool no_plots = false;
  bool no_run = false;

  PipelineOptions to_options() const {
    PipelineOptions o;
    o.scenario_path = scenario;
    o.out_dir = out;
    o.seed = seed;
    o.frames = frames;
    if (suppress_static) o.suppress_static = true;
    o.use_velocity = !no_velocity;
    o.split_visibility = split_visibility;
    o.write_plots = !no_plots;
    o.write_raw = raw;
    return o;
  }
};

void add_scenario_flags(CLI::App& sub, CommonFlags& f) {
  sub.add_option("--scenario", f.scenario, "scenario file (json)")
      ->required()
      ->check(CLI::ExistingFile);
  sub.add_option("--out", f.out, "output directory for run artifacts")
      ->required();
  sub.add_option("--seed", f.seed, "override the scenario rng seed");
  sub.add_option("--frames", f.frames, "override the frame count");
  sub.add_flag("--suppress-static", f.suppress_static,
               "drop zero-Doppler returns in the point cloud stage");
  sub.add_flag("--raw", f.raw, "also dump the raw data cube per frame");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fmcw radar simulation and around-the-corner perception"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expanded help for every subcommand");

  CommonFlags f;

  CLI::App* simulate = app.add_subcommand(
      "simulate", "synthesize point clouds, wall map and ground truth");
  add_scenario_flags(*simulate, f);

  CLI::App* pipeline = app.add_subcommand(
      "pipeline", "full chain: simulate, reconstruct, detect, track, score");
  add_scenario_flags(*pipeline, f);
  pipeline->add_flag("--no-velocity", f.no_velocity,
                     "ablation: hide measured velocities from the tracker");
  pipeline->add_flag("--split-visibility", f.split_visibility,
                     "per-visibility rows in metrics.md");
  pipeline->add_flag("--no-plots", f.no_plots, "skip the svg frame plots");

  CLI::App* suite = app.add_subcommand(
      "suite", "write the built-in scenario set and run the pipeline on it");
  suite->add_option("--out", f.out, "suite output directory")->required();
  suite->add_flag("--no-run", f.no_run, "only write the scenario files");
  suite->add_flag("--no-plots", f.no_plots, "skip the svg frame plots");
  suite->add_flag("--no-velocity", f.no_velocity,
                  "ablation: hide measured velocities from the tracker");
  suite->add_flag("--split-visibility", f.split_visibility,
                  "per-visibility rows in each metrics.md");

  CLI::App* eval = app.add_subcommand(
      "eval", "recompute metrics from an existing run directory");
  eval->add_option("run_dir,--out", f.out, "pipeline run directory")
      ->required();
  eval->add_flag("--no-velocity", f.no_velocity,
                 "label the report as the no-velocity ablation");
  eval->add_flag("--split-visibility", f.split_visibility,
                 "per-visibility rows in metrics.md");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // help and friends
    std::string cmd;
    for (const CLI::App* sub : app.get_subcommands()) cmd = sub->get_name();
    app.exit(e);  // human-readable message first
    return fail(cmd, e.what());
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (*simulate) {
      print_run(run_simulate(f.to_options()), false);
    } else if (*pipeline) {
      print_run(run_pipeline(f.to_options()), true);
    } else if (*suite) {
      PipelineOptions base = f.to_options();
      const SuiteRunResult r = run_suite(f.out, base, !f.no_run);
      std::printf("scenarios      %s\n", r.scenario_dir.string().c_str());
      if (!f.no_run) {
        std::printf("runs           %s\n", r.runs_dir.string().c_str());
        for (const auto& [name, res] : r.runs) {
          std::printf("%s: frames %zu, points %zu\n", name.c_str(),
                      res.frames, res.points.total_points);
          print_metrics(res.metrics);
        }
        const auto summary = std::filesystem::path(f.out) / "summary.md";
        std::printf("summary        %s\n", summary.string().c_str());
      }
    } else if (*eval) {
      const MetricsReport m = run_eval(f.out, !f.no_velocity,
                                       f.split_visibility);
      print_metrics(m);
      std::printf("metrics.json and metrics.md updated in %s\n",
                  f.out.c_str());
    }
  } catch (const std::exception& e) {
    return fail(cmd, e.what());
  }
  return 0;
}
