#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlos/evaluation.hpp"
#include "nlos/suite.hpp"

namespace nlos {

struct PipelineOptions {
  std::filesystem::path scenario_path;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;    // replaces the scenario seed
  std::optional<int> frames;            // replaces the frame count
  std::optional<bool> suppress_static;  // overrides the processing block
  bool use_velocity = true;     // feed measured Doppler into the tracker
  bool split_visibility = false;  // per-visibility rows in metrics.md
  bool write_plots = true;
  bool write_raw = false;  // keep the raw frames next to the point clouds
};

/// Scenario file resolved against the command-line overrides.
struct ResolvedScenario {
  Scenario scenario;
  ProcessingConfig processing;
};
ResolvedScenario resolve_scenario(const PipelineOptions& opts);

struct StageTiming {
  std::string stage;
  double milliseconds = 0.0;
};

struct SimulateStats {
  std::size_t total_points = 0;
  std::size_t max_points_per_frame = 0;
};

struct PipelineResult {
  std::filesystem::path run_dir;
  std::size_t frames = 0;
  SimulateStats points;
  MetricsReport metrics;
  std::vector<StageTiming> timings;
};

// Stages. Each one talks to the run directory only: inputs are the files an
// earlier stage left there, outputs are files again, so any prefix of the
// chain can be re-run or swapped out and the result stays byte-identical.
SimulateStats stage_simulate(const ResolvedScenario& rs,
                             const std::filesystem::path& run_dir,
                             bool write_raw = false);
void stage_walls(const Scenario& scenario,
                 const std::filesystem::path& run_dir);
void stage_ground_truth(const Scenario& scenario,
                        const std::filesystem::path& run_dir);
void stage_reconstruct(const ResolvedScenario& rs,
                       const std::filesystem::path& run_dir);
void stage_detect(const ResolvedScenario& rs,
                  const std::filesystem::path& run_dir, bool use_velocity);
void stage_track(const ResolvedScenario& rs,
                 const std::filesystem::path& run_dir, bool use_velocity);
MetricsReport stage_eval(const std::filesystem::path& run_dir,
                         bool use_velocity, bool split_visibility);
void stage_plots(const ResolvedScenario& rs,
                 const std::filesystem::path& run_dir);

/// Synthesis only: scenario snapshot, point clouds, wall estimate, ground
/// truth, manifest.
PipelineResult run_simulate(const PipelineOptions& opts);

/// The whole chain through metrics and plots.
PipelineResult run_pipeline(const PipelineOptions& opts);

/// Recompute metrics from the artifacts already in run_dir.
MetricsReport run_eval(const std::filesystem::path& run_dir,
                       bool use_velocity, bool split_visibility);

struct SuiteRunResult {
  std::filesystem::path scenario_dir;
  std::filesystem::path runs_dir;
  std::vector<std::pair<std::string, PipelineResult>> runs;
};

/// Generate the built-in scenario set under out_dir/scenarios and, when run
/// is set, push every scenario through the pipeline under out_dir/runs,
/// leaving an aggregated summary.json / summary.md at out_dir.
SuiteRunResult run_suite(const std::filesystem::path& out_dir,
                         PipelineOptions base, bool run = true);

// Run-directory layout helpers.
std::filesystem::path cloud_path(const std::filesystem::path& run_dir,
                                 std::size_t frame);
std::filesystem::path recon_path(const std::filesystem::path& run_dir,
                                 std::size_t frame);
std::filesystem::path plot_path(const std::filesystem::path& run_dir,
                                std::size_t frame);

}  // namespace nlos
