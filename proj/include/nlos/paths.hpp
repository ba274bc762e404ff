#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlos/scene.hpp"

namespace nlos {

enum class PathKind { direct, third_bounce };

/// One resolvable return at a frame instant: either a direct reflection or a
/// sensor -> wall -> target -> wall -> sensor bounce. For a bounced return
/// the target appears at the mirror image of the scatterer, so
/// apparent_position is what range/angle processing will localize.
struct PropagationPath {
  PathKind kind = PathKind::direct;
  std::string object_id;       // empty for clutter
  int scatterer_index = 0;
  int wall_index = -1;         // relay wall, -1 for direct
  Vec2 wall_point{0.0, 0.0};   // specular point on the relay wall
  Vec2 apparent_position{0.0, 0.0};
  Vec2 source_position{0.0, 0.0};  // true scatterer location
  double path_length = 0.0;    // full transport length (out and back), m
  double radial_velocity = 0.0;  // m/s, positive when receding
  double amplitude = 0.0;
  double azimuth = 0.0;        // rad, sensor frame, of the apparent position
};

/// Mirror image of a point across the wall's infinite line.
Vec2 mirror_across_wall(const Vec2& p, const WallSegment& wall);

/// Specular point for the bounce sensor -> wall -> target, empty when the
/// reflection does not land strictly inside the wall segment (or the target
/// sits behind the wall plane).
std::optional<Vec2> specular_point(const Vec2& sensor, const Vec2& target,
                                   const WallSegment& wall);

/// Transport amplitude of a three-bounce return with the given one-way legs
/// (sensor->wall, wall->target, wall->sensor) and combined wall reflectivity.
double three_bounce_amplitude(double rcs, double reflectivity, double leg_sensor_wall,
                              double leg_wall_target, double leg_wall_sensor);

/// All propagation paths at time t: direct returns for unobstructed sources
/// and one bounce path per wall with valid specular geometry. Paths outside
/// the field of view or beyond max_range are dropped. Order is deterministic:
/// objects then clutter, scatterers in order, direct before bounces.
std::vector<PropagationPath> enumerate_paths(const Scenario& scenario, double t);

}  // namespace nlos
