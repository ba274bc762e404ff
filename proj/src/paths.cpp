#include "nlos/paths.hpp"

#include <cmath>

namespace nlos {
namespace {

/// Direct or bounced, a path is only kept when the sensor can resolve it:
/// apparent range within the processing window and azimuth inside the FoV.
bool within_sensor_limits(const Scenario& sc, double apparent_range, double azimuth) {
  return apparent_range >= sc.sensor.range_resolution &&
         apparent_range <= sc.sensor.max_range &&
         std::abs(azimuth) <= 0.5 * sc.sensor.fov_azimuth;
}

double sensor_azimuth(const Scenario& sc, const Vec2& world_point) {
  const Vec2 local = sc.sensor_pose.to_local(world_point);
  return std::atan2(local.y(), local.x());
}

/// Walls block a leg when they cross it; the relay wall itself is skipped
/// because a straight leg ending on it cannot cross it elsewhere.
bool leg_blocked(const Vec2& a, const Vec2& b, const Scenario& sc, int skip_wall) {
  for (std::size_t i = 0; i < sc.walls.size(); ++i) {
    if (static_cast<int>(i) == skip_wall) continue;
    if (segments_intersect(a, b, sc.walls[i].p1, sc.walls[i].p2)) return true;
  }
  return false;
}

struct Source {
  Vec2 position;
  Vec2 velocity;
  double rcs;
  std::string object_id;
  int scatterer_index;
};

void add_paths_for_source(const Scenario& sc, const Source& src,
                          std::vector<PropagationPath>& out) {
  const Vec2 c = sc.sensor_pose.position;
  const Vec2 rel_velocity = src.velocity - sc.ego_velocity;

  if (!line_of_sight_blocked(c, src.position, sc.walls)) {
    const double r = (src.position - c).norm();
    const double az = sensor_azimuth(sc, src.position);
    if (within_sensor_limits(sc, r, az)) {
      PropagationPath p;
      p.kind = PathKind::direct;
      p.object_id = src.object_id;
      p.scatterer_index = src.scatterer_index;
      p.apparent_position = src.position;
      p.source_position = src.position;
      p.path_length = 2.0 * r;
      p.radial_velocity = rel_velocity.dot((src.position - c) / r);
      p.amplitude = src.rcs / (r * r * r * r);
      p.azimuth = az;
      out.push_back(std::move(p));
    }
  }

  for (std::size_t wi = 0; wi < sc.walls.size(); ++wi) {
    const WallSegment& wall = sc.walls[wi];
    const auto xw = specular_point(c, src.position, wall);
    if (!xw) continue;
    if (leg_blocked(c, *xw, sc, static_cast<int>(wi))) continue;
    if (leg_blocked(*xw, src.position, sc, static_cast<int>(wi))) continue;

    const Vec2 xv = mirror_across_wall(src.position, wall);
    const double r_virtual = (xv - c).norm();
    const double az = sensor_azimuth(sc, xv);
    if (!within_sensor_limits(sc, r_virtual, az)) continue;

    PropagationPath p;
    p.kind = PathKind::third_bounce;
    p.object_id = src.object_id;
    p.scatterer_index = src.scatterer_index;
    p.wall_index = static_cast<int>(wi);
    p.wall_point = *xw;
    p.apparent_position = xv;
    p.source_position = src.position;
    const double leg_cw = (*xw - c).norm();
    const double leg_wx = (src.position - *xw).norm();
    p.path_length = leg_cw + 2.0 * leg_wx + leg_cw;
    p.radial_velocity = rel_velocity.dot((xv - c) / r_virtual);
    p.amplitude =
        three_bounce_amplitude(src.rcs, wall.reflectivity, leg_cw, leg_wx, leg_cw);
    p.azimuth = az;
    out.push_back(std::move(p));
  }
}

}  // namespace

Vec2 mirror_across_wall(const Vec2& p, const WallSegment& wall) {
  return reflect_point_across_line(p, wall.p1, wall.p2);
}

std::optional<Vec2> specular_point(const Vec2& sensor, const Vec2& target,
                                   const WallSegment& wall) {
  // Specular reflection only happens off the lit face.
  if (wall.signed_distance(target) >= 0.0 || wall.signed_distance(sensor) >= 0.0)
    return std::nullopt;
  const Vec2 xv = reflect_point_across_line(target, wall.p1, wall.p2);
  const Vec2 ray = xv - sensor;
  const Vec2 seg = wall.p2 - wall.p1;
  const double denom = cross2(ray, seg);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double tau = cross2(wall.p1 - sensor, seg) / denom;  // along the ray
  const double s = cross2(wall.p1 - sensor, ray) / denom;    // along the wall
  if (!(tau > 0.0 && tau < 1.0)) return std::nullopt;
  if (!(s > 0.0 && s < 1.0)) return std::nullopt;  // strictly inside the segment
  return sensor + tau * ray;
}

double three_bounce_amplitude(double rcs, double reflectivity, double leg_sensor_wall,
                              double leg_wall_target, double leg_wall_sensor) {
  const double a = leg_sensor_wall + leg_wall_target;
  const double b = leg_wall_target + leg_wall_sensor;
  return reflectivity * reflectivity * rcs / (a * a * b * b);
}

std::vector<PropagationPath> enumerate_paths(const Scenario& scenario, double t) {
  std::vector<PropagationPath> out;
  for (std::size_t oi = 0; oi < scenario.objects.size(); ++oi) {
    const HiddenObject& obj = scenario.objects[oi];
    const State2D state = obj.trajectory.state_at(t);
    const double heading = obj.trajectory.heading_at(t);
    const auto offsets = scatterer_offsets(scenario, oi);
    const double rcs_each = obj.rcs / static_cast<double>(offsets.size());
    for (std::size_t si = 0; si < offsets.size(); ++si) {
      Source src;
      src.position = state.position + rotate(offsets[si], heading);
      src.velocity = state.velocity;
      src.rcs = rcs_each;
      src.object_id = obj.id;
      src.scatterer_index = static_cast<int>(si);
      add_paths_for_source(scenario, src, out);
    }
  }
  for (std::size_t ci = 0; ci < scenario.clutter.size(); ++ci) {
    Source src;
    src.position = scenario.clutter[ci].position;
    src.velocity = {0.0, 0.0};
    src.rcs = scenario.clutter[ci].rcs;
    src.object_id = "";
    src.scatterer_index = static_cast<int>(ci);
    add_paths_for_source(scenario, src, out);
  }
  return out;
}

}  // namespace nlos
