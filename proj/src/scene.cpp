#include "nlos/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nlos/rng.hpp"

namespace nlos {

SensorConfig& SensorConfig::derive() {
  range_resolution = kSpeedOfLight / (2.0 * bandwidth);
  velocity_resolution = wavelength() / (2.0 * num_chirps * chirp_period);
  angle_resolution = wavelength() / (num_rx_antennas * antenna_spacing);
  return *this;
}

std::vector<std::string> SensorConfig::invariant_errors() const {
  std::vector<std::string> errors;
  auto require = [&](bool ok, const char* msg) {
    if (!ok) errors.emplace_back(msg);
  };
  require(carrier_frequency > 0.0, "carrier_frequency must be positive");
  require(bandwidth > 0.0, "bandwidth must be positive");
  require(ramp_time > 0.0, "ramp_time must be positive");
  require(chirp_period > 0.0, "chirp_period must be positive");
  require(ramp_time <= chirp_period, "ramp_time must not exceed chirp_period");
  require(num_chirps > 0, "num_chirps must be positive");
  require(num_samples_per_chirp > 0, "num_samples_per_chirp must be positive");
  require(num_rx_antennas > 0, "num_rx_antennas must be positive");
  require(antenna_spacing > 0.0, "antenna_spacing must be positive");
  require(max_range > 0.0, "max_range must be positive");
  require(angle_bins >= num_rx_antennas, "angle_bins must cover the array");
  require(fov_azimuth > 0.0 && fov_azimuth <= 2.0 * std::numbers::pi,
          "fov_azimuth must lie in (0, 2*pi]");
  if (carrier_frequency > 0.0 && antenna_spacing > 0.0) {
    // Half-wavelength limit keeps the angle spectrum alias free.
    require(antenna_spacing <= 0.5 * wavelength() * (1.0 + 1e-12),
            "antenna_spacing must not exceed half a wavelength");
  }
  auto matches = [](double stored, double expected) {
    return std::abs(stored - expected) <= 1e-9 * std::abs(expected);
  };
  if (bandwidth > 0.0) {
    require(matches(range_resolution, kSpeedOfLight / (2.0 * bandwidth)),
            "range_resolution does not match c / (2 B)");
  }
  if (carrier_frequency > 0.0 && num_chirps > 0 && chirp_period > 0.0) {
    require(matches(velocity_resolution,
                    wavelength() / (2.0 * num_chirps * chirp_period)),
            "velocity_resolution does not match lambda / (2 N T)");
  }
  return errors;
}

void SensorConfig::validate() const {
  auto errors = invariant_errors();
  if (!errors.empty()) throw std::invalid_argument("sensor config: " + errors.front());
}

WallSegment WallSegment::from_endpoints(const Vec2& a, const Vec2& b,
                                        const Vec2& sensor_position,
                                        double reflectivity) {
  const double len = (b - a).norm();
  if (len < kMinWallLength)
    throw std::invalid_argument("wall segment shorter than the 1 m minimum");
  WallSegment w;
  w.p1 = a;
  w.p2 = b;
  w.reflectivity = reflectivity;
  w.direction = (b - a) / len;
  w.normal = rot90_cw(w.direction);
  const double side = w.normal.dot(w.midpoint() - sensor_position);
  if (side == 0.0)
    throw std::invalid_argument("sensor lies on the wall line");
  if (side < 0.0) {
    // Swap the endpoint order so direction stays rot90_ccw(normal) while the
    // normal faces away from the sensor.
    std::swap(w.p1, w.p2);
    w.direction = -w.direction;
    w.normal = -w.normal;
  }
  return w;
}

Trajectory Trajectory::linear(const Vec2& start, const Vec2& velocity) {
  Trajectory t;
  t.kind_ = Kind::linear;
  t.start_ = start;
  t.velocity_ = velocity;
  return t;
}

Trajectory Trajectory::keyframes(std::vector<TrajectoryKeyframe> frames) {
  if (frames.empty())
    throw std::invalid_argument("keyframe trajectory needs at least one keyframe");
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].t <= frames[i - 1].t)
      throw std::invalid_argument("keyframe times must be strictly increasing");
  }
  Trajectory t;
  t.kind_ = Kind::keyframes;
  t.frames_ = std::move(frames);
  return t;
}

Trajectory Trajectory::arc(const Vec2& center, double radius,
                           double angular_rate, double start_angle) {
  if (radius <= 0.0) throw std::invalid_argument("arc radius must be positive");
  Trajectory t;
  t.kind_ = Kind::arc;
  t.center_ = center;
  t.radius_ = radius;
  t.angular_rate_ = angular_rate;
  t.start_angle_ = start_angle;
  return t;
}

State2D Trajectory::state_at(double t) const {
  switch (kind_) {
    case Kind::linear:
      return {start_ + t * velocity_, velocity_};
    case Kind::arc: {
      const double a = start_angle_ + angular_rate_ * t;
      const Vec2 radial = unit_vector(a);
      return {center_ + radius_ * radial,
              radius_ * angular_rate_ * rot90_ccw(radial)};
    }
    case Kind::keyframes: {
      if (t <= frames_.front().t) return {frames_.front().position, {0.0, 0.0}};
      if (t >= frames_.back().t) return {frames_.back().position, {0.0, 0.0}};
      std::size_t i = 1;
      while (frames_[i].t < t) ++i;
      const auto& a = frames_[i - 1];
      const auto& b = frames_[i];
      const double dt = b.t - a.t;
      const Vec2 v = (b.position - a.position) / dt;
      return {a.position + (t - a.t) * v, v};
    }
  }
  throw std::logic_error("unreachable");
}

double Trajectory::heading_at(double t) const {
  const State2D s = state_at(t);
  if (s.velocity.norm() > 1e-9) return std::atan2(s.velocity.y(), s.velocity.x());
  if (kind_ == Kind::keyframes) {
    // Stationary instant: borrow the heading of the nearest moving segment,
    // looking backwards first.
    for (std::size_t i = frames_.size(); i-- > 1;) {
      if (frames_[i - 1].t <= t || i == 1) {
        for (std::size_t j = i; j-- > 1;) {
          const Vec2 d = frames_[j].position - frames_[j - 1].position;
          if (d.norm() > 1e-9) return std::atan2(d.y(), d.x());
        }
        break;
      }
    }
    for (std::size_t j = 1; j < frames_.size(); ++j) {
      const Vec2 d = frames_[j].position - frames_[j - 1].position;
      if (d.norm() > 1e-9) return std::atan2(d.y(), d.x());
    }
  }
  if (kind_ == Kind::arc) return start_angle_ + angular_rate_ * t + 0.5 * std::numbers::pi;
  return 0.0;
}

const char* to_string(ObjectClass c) {
  return c == ObjectClass::pedestrian ? "pedestrian" : "cyclist";
}

ObjectClass object_class_from_string(const std::string& s) {
  if (s == "pedestrian") return ObjectClass::pedestrian;
  if (s == "cyclist") return ObjectClass::cyclist;
  throw std::invalid_argument("unknown object class '" + s + "'");
}

bool line_of_sight_blocked(const Vec2& sensor, const Vec2& target,
                           std::span<const WallSegment> walls) {
  for (const auto& w : walls) {
    if (segments_intersect(sensor, target, w.p1, w.p2)) return true;
  }
  return false;
}

const HiddenObject* Scenario::find_object(const std::string& id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

State2D object_state_at(const Scenario& scenario, const std::string& id,
                        double t) {
  const HiddenObject* obj = scenario.find_object(id);
  if (!obj) throw std::out_of_range("unknown object id '" + id + "'");
  const double span = scenario.frames.span();
  if (t < -1e-9 || t > span + 1e-9)
    throw std::invalid_argument("time outside the frame schedule");
  return obj->trajectory.state_at(t);
}

std::vector<Vec2> scatterer_offsets(const Scenario& scenario,
                                    std::size_t object_index) {
  if (object_index >= scenario.objects.size())
    throw std::out_of_range("object index out of range");
  const HiddenObject& obj = scenario.objects[object_index];
  const int n = std::max(1, obj.num_scatterers);
  RngStream rng(scenario.rng_seed, 0x5ca77e00ull + object_index);
  std::vector<Vec2> offsets;
  offsets.reserve(n);
  for (int i = 0; i < n; ++i) {
    // Stratified along the length so the spread reflects the footprint,
    // jittered within each stratum.
    const double u = n == 1 ? 0.5 : (i + 0.25 + 0.5 * rng.uniform()) / n;
    const double x = (u - 0.5) * obj.length;
    const double y = (rng.uniform() - 0.5) * obj.width;
    offsets.emplace_back(x, y);
  }
  return offsets;
}

ValidationReport Scenario::validate() const {
  ValidationReport report;
  for (const auto& e : sensor.invariant_errors())
    report.errors.push_back("sensor: " + e);

  if (frames.count < 1) report.errors.push_back("frames.count must be at least 1");
  if (frames.interval <= 0.0) report.errors.push_back("frames.interval must be positive");
  if (frames.interval < sensor.frame_duration() - 1e-12) {
    report.errors.push_back(
        "frames.interval is shorter than one measurement frame (num_chirps * chirp_period)");
  }
  if (noise_power < 0.0) report.errors.push_back("noise_power must not be negative");

  for (std::size_t i = 0; i < walls.size(); ++i) {
    const auto& w = walls[i];
    const std::string tag = "walls[" + std::to_string(i) + "]: ";
    if (w.length() < kMinWallLength)
      report.errors.push_back(tag + "shorter than the 1 m minimum");
    if (std::abs(w.direction.norm() - 1.0) > 1e-9 ||
        std::abs(w.normal.norm() - 1.0) > 1e-9 ||
        (rot90_ccw(w.normal) - w.direction).norm() > 1e-9)
      report.errors.push_back(tag + "direction/normal frame is inconsistent");
    if (w.signed_distance(sensor_pose.position) >= 0.0)
      report.errors.push_back(tag + "normal does not point away from the sensor");
    if (w.reflectivity <= 0.0 || w.reflectivity > 1.0)
      report.errors.push_back(tag + "reflectivity must lie in (0, 1]");
  }

  const double span = frames.span();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    const std::string tag = "objects[" + std::to_string(i) + "] '" + o.id + "': ";
    if (o.id.empty()) report.errors.push_back(tag + "id must not be empty");
    for (std::size_t j = 0; j < i; ++j) {
      if (objects[j].id == o.id) {
        report.errors.push_back(tag + "duplicate id");
        break;
      }
    }
    if (o.width <= 0.0 || o.length <= 0.0)
      report.errors.push_back(tag + "footprint must be positive");
    if (o.rcs <= 0.0) report.errors.push_back(tag + "rcs must be positive");
    if (o.num_scatterers < 1 || o.num_scatterers > 16)
      report.errors.push_back(tag + "num_scatterers must lie in [1, 16]");

    const int steps = std::max(1, frames.count * 4);
    double vmax = 0.0;
    for (int k = 0; k <= steps; ++k) {
      const double t = span * k / steps;
      vmax = std::max(vmax, o.trajectory.state_at(t).velocity.norm());
    }
    if (vmax >= kMaxObjectSpeed)
      report.errors.push_back(tag + "speed reaches " + std::to_string(vmax) +
                              " m/s; the scene model caps speeds below 15 m/s");

    if (!line_of_sight_blocked(sensor_pose.position,
                               o.trajectory.state_at(0.0).position, walls)) {
      report.warnings.push_back(tag + "not occluded at the first frame");
    }
  }

  for (std::size_t i = 0; i < clutter.size(); ++i) {
    if (clutter[i].rcs <= 0.0)
      report.errors.push_back("clutter[" + std::to_string(i) + "]: rcs must be positive");
  }
  return report;
}

}  // namespace nlos
