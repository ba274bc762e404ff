#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nlos/geometry.hpp"

namespace nlos {

/// Chirp-sequence radar front end. Defaults describe a mid-range automotive
/// sensor: 76.5 GHz carrier, 1 GHz sweep, 64 chirps per frame, 64 element
/// uniform linear array at half-wavelength spacing.
struct SensorConfig {
  double carrier_frequency = 76.5e9;  // Hz
  double bandwidth = 1.0e9;           // Hz swept during one ramp
  double ramp_time = 3.2e-4;          // s, active sweep within a chirp
  double chirp_period = 3.53e-4;      // s, chirp repetition interval
  int num_chirps = 64;                // chirps per frame (Doppler axis)
  int num_samples_per_chirp = 1024;   // fast-time samples (range axis)
  int num_rx_antennas = 64;           // array elements (angle axis)
  double antenna_spacing = 0.5 * kSpeedOfLight / 76.5e9;  // m
  double max_range = 153.0;           // m, processing limit
  double fov_azimuth = 140.0 * std::numbers::pi / 180.0;  // rad, full width
  int angle_bins = 512;               // zero-padded azimuth spectrum length

  // Derived; fill with derive(). Kept as fields so configs can be checked
  // against what the primary parameters imply.
  double range_resolution = 0.0;     // m,  c / (2 B)
  double velocity_resolution = 0.0;  // m/s, lambda / (2 N T_chirp)
  double angle_resolution = 0.0;     // rad, lambda / (M d)

  double wavelength() const { return kSpeedOfLight / carrier_frequency; }
  double sample_rate() const { return num_samples_per_chirp / ramp_time; }
  double frame_duration() const { return num_chirps * chirp_period; }
  /// Largest Doppler velocity representable without aliasing.
  double max_unambiguous_velocity() const {
    return wavelength() / (4.0 * chirp_period);
  }

  SensorConfig& derive();
  /// Collect invariant violations ("" when valid). Checks positivity, ramp
  /// within chirp period, spacing at most half a wavelength, and that stored
  /// resolutions match the primary parameters to 1e-9 relative.
  std::vector<std::string> invariant_errors() const;
  void validate() const;  // throws std::invalid_argument on the first error

  static SensorConfig mid_range() { return SensorConfig{}.derive(); }
};

/// Straight reflective surface. Endpoints are stored so that the unit normal
/// points away from the sensor and direction == rot90_ccw(normal).
struct WallSegment {
  Vec2 p1{0.0, 0.0};
  Vec2 p2{1.0, 0.0};
  Vec2 direction{1.0, 0.0};  // unit, (p2 - p1) / length
  Vec2 normal{0.0, -1.0};    // unit, away from the sensor
  double reflectivity = 1.0;

  double length() const { return (p2 - p1).norm(); }
  Vec2 midpoint() const { return 0.5 * (p1 + p2); }
  /// Signed distance of p from the wall line, positive on the normal side.
  double signed_distance(const Vec2& p) const { return normal.dot(p - p1); }

  static WallSegment from_endpoints(const Vec2& a, const Vec2& b,
                                    const Vec2& sensor_position,
                                    double reflectivity = 1.0);
};

inline constexpr double kMinWallLength = 1.0;  // m, shorter fits are dropped

struct State2D {
  Vec2 position{0.0, 0.0};
  Vec2 velocity{0.0, 0.0};
};

struct TrajectoryKeyframe {
  double t = 0.0;
  Vec2 position{0.0, 0.0};
};

/// Motion of a scene object. Linear, piecewise-linear keyframes, or a
/// constant-rate circular arc. Outside its own time span a trajectory holds
/// the boundary position with zero velocity.
class Trajectory {
 public:
  enum class Kind { linear, keyframes, arc };

  Trajectory() = default;  // stationary at the origin

  static Trajectory linear(const Vec2& start, const Vec2& velocity);
  static Trajectory keyframes(std::vector<TrajectoryKeyframe> frames);
  static Trajectory arc(const Vec2& center, double radius, double angular_rate,
                        double start_angle);

  State2D state_at(double t) const;
  /// Orientation of motion; for stationary instants the nearest moving
  /// segment decides, so ground-truth boxes keep a stable heading.
  double heading_at(double t) const;
  Kind kind() const { return kind_; }
  const std::vector<TrajectoryKeyframe>& frames() const { return frames_; }
  const Vec2& arc_center() const { return center_; }
  double arc_radius() const { return radius_; }
  double arc_angular_rate() const { return angular_rate_; }
  double arc_start_angle() const { return start_angle_; }
  const Vec2& linear_start() const { return start_; }
  const Vec2& linear_velocity() const { return velocity_; }

 private:
  Kind kind_ = Kind::linear;
  Vec2 start_{0.0, 0.0}, velocity_{0.0, 0.0};     // linear
  std::vector<TrajectoryKeyframe> frames_;        // keyframes
  Vec2 center_{0.0, 0.0};                         // arc
  double radius_ = 0.0, angular_rate_ = 0.0, start_angle_ = 0.0;
};

enum class ObjectClass { pedestrian, cyclist };

const char* to_string(ObjectClass c);
ObjectClass object_class_from_string(const std::string& s);

inline constexpr double kMaxObjectSpeed = 15.0;  // m/s, scene invariant

/// A moving target, usually occluded for part of the sequence. The radar
/// return is modelled as a few point scatterers on the footprint.
struct HiddenObject {
  std::string id;
  ObjectClass object_class = ObjectClass::pedestrian;
  double width = 0.45;   // m, across the heading
  double length = 0.45;  // m, along the heading
  double rcs = 0.1;      // m^2, split evenly across scatterers
  int num_scatterers = 3;
  Trajectory trajectory;
};

/// Static reflective point in the direct field of view (poles, curbs, ...).
struct ClutterPoint {
  Vec2 position{0.0, 0.0};
  double rcs = 1.0;  // m^2
};

struct FrameSchedule {
  int count = 1;
  double interval = 0.1;  // s between frame starts

  double time_of(int frame_index) const { return frame_index * interval; }
  double span() const { return (count - 1) * interval; }
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

/// Full scene description: sensor, walls, hidden objects, clutter, noise
/// level and the frame schedule. Everything downstream is a deterministic
/// function of a scenario and its seed.
struct Scenario {
  std::string name = "scenario";
  std::uint64_t rng_seed = 1;
  Pose2D sensor_pose;
  SensorConfig sensor = SensorConfig::mid_range();
  Vec2 ego_velocity{0.0, 0.0};
  std::vector<WallSegment> walls;
  std::vector<HiddenObject> objects;
  std::vector<ClutterPoint> clutter;
  double noise_power = 0.0;  // complex noise variance per raw sample
  FrameSchedule frames;

  ValidationReport validate() const;
  const HiddenObject* find_object(const std::string& id) const;
};

/// True when the segment from the sensor to the target crosses any wall.
/// A grazing touch counts as blocked.
bool line_of_sight_blocked(const Vec2& sensor, const Vec2& target,
                           std::span<const WallSegment> walls);

/// Position and velocity of an object at time t. Throws std::out_of_range
/// for an unknown id and std::invalid_argument for t outside the frame
/// schedule.
State2D object_state_at(const Scenario& scenario, const std::string& id,
                        double t);

/// Scatterer offsets in the object body frame (x along heading), drawn
/// deterministically from the scenario seed and object index. Offsets are
/// spread along the length so elongated objects image as elongated clusters.
std::vector<Vec2> scatterer_offsets(const Scenario& scenario,
                                    std::size_t object_index);

}  // namespace nlos
