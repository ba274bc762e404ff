#pragma once

#include <cstddef>
#include <vector>

#include "nlos/fmcw.hpp"
#include "nlos/scene.hpp"

namespace nlos {

/// Ordered-statistic CFAR settings. The window counts training cells along
/// the range axis (split around the cell under test), guard cells sit between
/// the cell under test and the window on each side.
struct CfarParams {
  double pfa = 1e-4;
  int window = 16;
  int guard = 2;
  double order_fraction = 0.75;  // rank of the order statistic, k = f * n
  int max_points = 9999;         // amplitude-ranked cap on output size
  // Angle-axis sidelobe blanking: drop detections more than this many dB
  // below the strongest detection in the same range-velocity cell (0 = off).
  // The angle spectrum is the one axis computed on a padded grid, so the
  // window's continuous sidelobes of one strong return show up there no
  // matter how the return sits against the bin grid.
  double sidelobe_rejection_db = 0.0;
};

struct DspParams {
  bool window_fast_time = true;  // Hann on the sample axis
  bool window_slow_time = true;  // Hann on the chirp axis
  bool window_angle = true;      // Hann across the array
  /// When positive, angle spectra are only computed for range-velocity cells
  /// whose energy exceeds factor * median; other cells stay zero and the
  /// CFAR statistic is clamped at the floor. Zero computes everything.
  double angle_floor_median_factor = 0.0;
  bool suppress_static = false;  // drop |v_r| below one velocity bin
  CfarParams cfar;
};

/// Power spectrum over (range, angle, velocity). Velocity and angle axes are
/// center-shifted: index 0 is the most negative bin. Layout is range-major
/// per (angle, velocity) slice: index = (a * velocity_bins + v) * range_bins + r.
struct RadarCube {
  int range_bins = 0;
  int angle_bins = 0;
  int velocity_bins = 0;
  double range_scale = 0.0;      // m per range bin
  double velocity_scale = 0.0;   // m/s per velocity bin
  double angle_sin_scale = 0.0;  // sin(azimuth) per angle bin
  double max_range = 0.0;
  double fov_azimuth = 0.0;
  double timestamp = 0.0;
  double power_floor = 0.0;      // 0 when every cell was computed
  std::size_t peak_index = 0;    // strongest cell, tracked during transform
  std::vector<float> power;

  std::size_t index(int r, int a, int v) const {
    return (static_cast<std::size_t>(a) * velocity_bins + v) * range_bins + r;
  }
  float at(int r, int a, int v) const { return power[index(r, a, v)]; }
  double range_of(double range_bin) const { return range_bin * range_scale; }
  double velocity_of(double velocity_bin) const {
    return (velocity_bin - 0.5 * velocity_bins) * velocity_scale;
  }
  double sin_azimuth_of(double angle_bin) const {
    return (angle_bin - 0.5 * angle_bins) * angle_sin_scale;
  }
};

/// Range -> velocity -> angle spectral decomposition of one raw frame.
/// Throws when the frame shape disagrees with the sensor config.
RadarCube transform(const RawFrame& frame, const SensorConfig& config,
                    const DspParams& params);

struct RadarPoint {
  double azimuth = 0.0;          // rad, sensor frame
  double range = 0.0;            // m
  double radial_velocity = 0.0;  // m/s, positive receding
  double amplitude = 0.0;        // linear power at the refined peak
  double log_amplitude = 0.0;    // natural log of amplitude
};

struct PointCloud {
  double timestamp = 0.0;
  std::vector<RadarPoint> points;
};

/// Ordered-statistic CFAR with sub-bin refinement. Detections are local
/// maxima over the six cube neighbours whose power exceeds the scaled order
/// statistic of their range window; each is refined by a three-point
/// log-parabola per axis and converted to physical units. Output is sorted
/// by amplitude and capped at max_points.
PointCloud cfar_detect(const RadarCube& cube, const DspParams& params);

/// Exact false-alarm scale: threshold multiplier alpha such that a cell of
/// iid exponential noise exceeds alpha times the k-th of n order statistics
/// with probability pfa.
double os_cfar_scale(double pfa, int n, int k);

/// Refined point at a given cube cell (no threshold applied).
RadarPoint refine_cube_peak(const RadarCube& cube, int r, int a, int v);

/// Sensor-frame polar to world Cartesian.
Vec2 to_cartesian(const RadarPoint& point, const Pose2D& sensor_pose);

}  // namespace nlos
