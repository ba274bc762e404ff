#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlos/geometry.hpp"
#include "nlos/scene.hpp"

namespace nlos {

/// Bird's-eye-view point set from a first-return lidar sweep, plus the grid
/// pitch used when it is binned into an occupancy grid.
struct LidarBev {
  std::vector<Vec2> points;
  double bin_size = 0.01;  // m
};

struct WallEstimationParams {
  int ransac_iterations = 256;
  double inlier_tolerance_bins = 1.5;  // perpendicular distance, in bins
  double split_gap = 0.2;              // m, along-line gap that splits a run
  double merge_gap = 0.2;              // m, collinear segments closer than this fuse
  double merge_angle = 0.035;          // rad, max direction difference when merging
  double merge_lateral = 0.03;         // m, max line offset when merging
  std::size_t max_walls = 16;
  std::uint64_t seed = 0x77a11u;
};

/// Fit straight wall segments to a binned BEV point set. Occupancy is
/// binarized at one point per bin, lines are found by repeated seeded RANSAC
/// with a PCA refit, inlier runs are split at along-line gaps, pieces shorter
/// than kMinWallLength are dropped and collinear neighbours are merged.
/// Returned normals face away from the sensor. Deterministic for fixed input.
std::vector<WallSegment> estimate_walls(const LidarBev& bev,
                                        const Vec2& sensor_position,
                                        const WallEstimationParams& params = {});

/// Idealized lidar sweep of the static scene: walls sampled every `spacing`
/// metres where the sensor has an unobstructed view, clutter points included
/// as single returns, everything limited to the configured max range. Gaussian
/// position noise of `noise_sigma` is added per axis when nonzero.
LidarBev sample_wall_bev(const Scenario& scenario, double spacing = 0.01,
                         double noise_sigma = 0.0, std::uint64_t seed = 0x11da5u);

/// Wall list round trip as CSV with a format tag line. Orientation is
/// preserved exactly (endpoints plus normal per row).
void save_walls_csv(const std::string& path, const std::vector<WallSegment>& walls);
std::vector<WallSegment> load_walls_csv(const std::string& path);

}  // namespace nlos
