#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nlos {

using Vec2 = Eigen::Vector2d;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Wrap an angle to [-pi, pi).
inline double wrap_pi(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - std::numbers::pi;
}

/// Wrap an angle to [-pi/2, pi/2). Used for box orientations, which are
/// defined only up to a half turn.
inline double wrap_half_pi(double a) {
  constexpr double pi = std::numbers::pi;
  a = std::fmod(a + 0.5 * pi, pi);
  if (a < 0.0) a += pi;
  return a - 0.5 * pi;
}

/// z-component of the cross product of two plane vectors.
inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Rotate a vector by +90 degrees (counterclockwise).
inline Vec2 rot90_ccw(const Vec2& v) { return Vec2(-v.y(), v.x()); }

/// Rotate a vector by -90 degrees (clockwise).
inline Vec2 rot90_cw(const Vec2& v) { return Vec2(v.y(), -v.x()); }

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

inline Vec2 unit_vector(double angle) {
  return Vec2(std::cos(angle), std::sin(angle));
}

/// Rigid 2D pose: position plus yaw. Local x is the boresight direction.
struct Pose2D {
  Vec2 position{0.0, 0.0};
  double yaw = 0.0;

  Vec2 to_world(const Vec2& local) const { return position + rotate(local, yaw); }
  Vec2 to_local(const Vec2& world) const { return rotate(world - position, -yaw); }
};

namespace detail {
// Sign of the orientation of (a, b, c): +1 counterclockwise, -1 clockwise,
// 0 collinear. Exact zero test; callers that need tolerance apply their own.
inline int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross2(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}
}  // namespace detail

/// True when segments [a1,a2] and [b1,b2] share a point, endpoint touches
/// included.
inline bool segments_intersect(const Vec2& a1, const Vec2& a2, const Vec2& b1,
                               const Vec2& b2) {
  using detail::on_segment;
  using detail::orientation;
  const int o1 = orientation(a1, a2, b1);
  const int o2 = orientation(a1, a2, b2);
  const int o3 = orientation(b1, b2, a1);
  const int o4 = orientation(b1, b2, a2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a1, a2, b1)) return true;
  if (o2 == 0 && on_segment(a1, a2, b2)) return true;
  if (o3 == 0 && on_segment(b1, b2, a1)) return true;
  if (o4 == 0 && on_segment(b1, b2, a2)) return true;
  return false;
}

/// Mirror a point across the infinite line through a and b.
inline Vec2 reflect_point_across_line(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) throw std::invalid_argument("reflect_point_across_line: degenerate line");
  const Vec2 foot = a + ab * (ab.dot(p - a) / len2);
  return 2.0 * foot - p;
}

/// Specular reflection of a direction about a surface with unit normal n.
inline Vec2 reflect_direction(const Vec2& d, const Vec2& n) {
  return d - 2.0 * n.dot(d) * n;
}

}  // namespace nlos
