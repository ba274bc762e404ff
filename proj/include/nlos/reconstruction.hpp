#pragma once

#include <string>
#include <vector>

#include "nlos/dsp.hpp"
#include "nlos/geometry.hpp"
#include "nlos/scene.hpp"

namespace nlos {

/// Detection mapped behind a relay wall before unfolding: mirror-image
/// position plus the ego-compensated radial velocity measured along the ray.
struct VirtualDetection {
  Vec2 x_v{0.0, 0.0};
  double v_r = 0.0;
  RadarPoint source;
};

enum class ReconKind {
  direct,        // no wall behind the point, kept at its measured position
  third_bounce,  // unfolded across a relay wall
};

enum class VelocityStatus {
  ok,
  near_perpendicular,    // |cos phi| at or below the cutoff, 1/cos blows up
  ambiguous_half_plane,  // ray exactly along the wall normal, sign undecidable
};

const char* to_string(VelocityStatus s);

/// One radar point after geometric unfolding. For third-bounce points x is
/// the mirror image of x_v across the wall line and v lies along the wall;
/// direct points keep x = x_v with the radial component as velocity.
struct NlosReconstruction {
  ReconKind kind = ReconKind::direct;
  VelocityStatus velocity_status = VelocityStatus::ok;
  int wall_index = -1;  // into the wall list given to reconstruct_frame
  Vec2 x{0.0, 0.0};
  Vec2 v{0.0, 0.0};
  Vec2 x_w{0.0, 0.0};    // specular point on the wall line
  double phi = 0.0;      // angle between (x_v - c) and the wall direction
  double gamma_v = 0.0;  // polar angle of x_v - c
  double gamma_w = 0.0;  // polar angle of the wall normal
  VirtualDetection detection;

  bool velocity_valid() const { return velocity_status == VelocityStatus::ok; }
};

inline constexpr double kCosPhiEpsilon = 0.05;

/// Intersection of the ray c -> x_v with the infinite wall line. Throws
/// std::domain_error when the ray is parallel to the wall.
Vec2 wall_intersection(const Vec2& c, const Vec2& x_v, const WallSegment& wall);

/// True when x_v lies behind the wall (normal side) and the specular point
/// x_w falls within the segment, endpoints included.
bool is_third_bounce(const Vec2& c, const Vec2& x_v, const Vec2& x_w,
                     const WallSegment& wall);

/// Unfold the virtual position: from x_w continue the remaining path length
/// |x_w - x_v| along the mirror-reflected direction. Equals the reflection
/// of x_v across the wall line. Throws std::domain_error when x_w == c.
Vec2 reconstruct_position(const Vec2& c, const Vec2& x_v, const Vec2& x_w,
                          const WallSegment& wall);

/// Wall-parallel velocity consistent with the measured radial velocity:
/// v = sign(v_r) * sign(gamma_v - gamma_w) * (|v_r| / |cos phi|) * direction.
/// Throws std::domain_error for the two degenerate geometries (see
/// VelocityStatus).
Vec2 reconstruct_velocity(const Vec2& x_v, const Vec2& x_w, const Vec2& c,
                          const WallSegment& wall, double v_r,
                          double cos_phi_epsilon = kCosPhiEpsilon);

struct ReconstructionParams {
  double cos_phi_epsilon = kCosPhiEpsilon;
};

/// Map every radar point of a frame into world coordinates, compensate the
/// ego motion, and unfold points that sit behind an estimated wall. When a
/// point is behind several walls the one whose specular point is closest to
/// the sensor wins (first surface hit).
std::vector<NlosReconstruction> reconstruct_frame(
    const PointCloud& cloud, const Pose2D& sensor_pose, const Vec2& ego_velocity,
    const std::vector<WallSegment>& walls, const ReconstructionParams& params = {});

/// NDJSON round trip for one frame of reconstructions: a header record with
/// frame index and timestamp, then one record per point.
void save_reconstructions(const std::string& path, std::size_t frame_index,
                          double timestamp,
                          const std::vector<NlosReconstruction>& recons);
struct ReconstructionFrame {
  std::size_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<NlosReconstruction> recons;
};
ReconstructionFrame load_reconstructions(const std::string& path);

}  // namespace nlos
