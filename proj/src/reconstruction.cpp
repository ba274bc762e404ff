#include "nlos/reconstruction.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nlos/io_util.hpp"
#include <json.hpp>

namespace nlos {

using Json = nlohmann::ordered_json;

const char* to_string(VelocityStatus s) {
  switch (s) {
    case VelocityStatus::ok: return "ok";
    case VelocityStatus::near_perpendicular: return "near_perpendicular";
    case VelocityStatus::ambiguous_half_plane: return "ambiguous_half_plane";
  }
  return "?";
}

Vec2 wall_intersection(const Vec2& c, const Vec2& x_v, const WallSegment& wall) {
  const Vec2 ray = x_v - c;
  const double denom = cross2(ray, wall.direction);
  if (std::abs(denom) < 1e-12)
    throw std::domain_error("wall_intersection: ray is parallel to the wall");
  const double s = cross2(wall.p1 - c, wall.direction) / denom;
  return c + s * ray;
}

bool is_third_bounce(const Vec2& c, const Vec2& x_v, const Vec2& x_w,
                     const WallSegment& wall) {
  (void)c;
  if (wall.signed_distance(x_v) < 0.0) return false;  // sensor side, not virtual
  const double len = wall.length();
  return (x_w - wall.p1).norm() <= len && (x_w - wall.p2).norm() <= len;
}

Vec2 reconstruct_position(const Vec2& c, const Vec2& x_v, const Vec2& x_w,
                          const WallSegment& wall) {
  const Vec2 incident = x_w - c;
  const double r_in = incident.norm();
  if (r_in < 1e-12)
    throw std::domain_error("reconstruct_position: sensor sits on the wall line");
  // Residual path beyond the wall, walked back along the reflected direction.
  const Vec2 reflected = incident - 2.0 * wall.normal.dot(incident) * wall.normal;
  return x_w + reflected * ((x_w - x_v).norm() / r_in);
}

Vec2 reconstruct_velocity(const Vec2& x_v, const Vec2& x_w, const Vec2& c,
                          const WallSegment& wall, double v_r,
                          double cos_phi_epsilon) {
  (void)x_w;
  const Vec2 ray = x_v - c;
  const double r = ray.norm();
  if (r < 1e-12) throw std::domain_error("reconstruct_velocity: x_v coincides with the sensor");
  // sign(gamma_v - gamma_w) without angle wrap trouble: the ray of a valid
  // third bounce always has a positive component along the normal, so the
  // angle difference lives in (-pi/2, pi/2) and matches this cross product.
  const double side = cross2(wall.normal, ray);
  if (side == 0.0)
    throw std::domain_error("reconstruct_velocity: ray along the wall normal, half-plane ambiguous");
  const double cos_phi = ray.dot(wall.direction) / r;
  if (std::abs(cos_phi) <= cos_phi_epsilon)
    throw std::domain_error("reconstruct_velocity: near-perpendicular geometry, velocity unreliable");
  const double sign_vr = (v_r > 0.0) - (v_r < 0.0);
  const double sign_side = (side > 0.0) ? 1.0 : -1.0;
  return sign_vr * sign_side * (std::abs(v_r) / std::abs(cos_phi)) * wall.direction;
}

std::vector<NlosReconstruction> reconstruct_frame(
    const PointCloud& cloud, const Pose2D& sensor_pose, const Vec2& ego_velocity,
    const std::vector<WallSegment>& walls, const ReconstructionParams& params) {
  std::vector<NlosReconstruction> out;
  out.reserve(cloud.points.size());
  const Vec2 c = sensor_pose.position;

  for (const RadarPoint& p : cloud.points) {
    NlosReconstruction rec;
    rec.detection.source = p;
    const Vec2 x_v = to_cartesian(p, sensor_pose);
    rec.detection.x_v = x_v;
    const Vec2 ray = x_v - c;
    const double r = ray.norm();
    const Vec2 dir = r > 0.0 ? Vec2(ray / r) : Vec2(1.0, 0.0);
    // Radial velocity of the target itself; the measurement folds in the ego
    // motion along the same ray (virtual or direct alike).
    rec.detection.v_r = p.radial_velocity + ego_velocity.dot(dir);
    rec.gamma_v = std::atan2(ray.y(), ray.x());

    int best_wall = -1;
    Vec2 best_xw{0.0, 0.0};
    double best_range = 0.0;
    for (std::size_t w = 0; w < walls.size(); ++w) {
      Vec2 x_w;
      try {
        x_w = wall_intersection(c, x_v, walls[w]);
      } catch (const std::domain_error&) {
        continue;
      }
      if (!is_third_bounce(c, x_v, x_w, walls[w])) continue;
      // The specular point must lie between sensor and virtual image.
      const double along = (x_w - c).dot(dir);
      if (along <= 0.0 || along > r) continue;
      if (best_wall < 0 || along < best_range) {
        best_wall = static_cast<int>(w);
        best_xw = x_w;
        best_range = along;
      }
    }

    if (best_wall < 0) {
      rec.kind = ReconKind::direct;
      rec.x = x_v;
      rec.v = rec.detection.v_r * dir;  // only the radial component is known
      rec.phi = 0.0;
      rec.gamma_w = 0.0;
      out.push_back(rec);
      continue;
    }

    const WallSegment& wall = walls[static_cast<std::size_t>(best_wall)];
    rec.kind = ReconKind::third_bounce;
    rec.wall_index = best_wall;
    rec.x_w = best_xw;
    rec.x = reconstruct_position(c, x_v, best_xw, wall);
    rec.gamma_w = std::atan2(wall.normal.y(), wall.normal.x());
    const double cos_phi = dir.dot(wall.direction);
    rec.phi = std::acos(std::clamp(cos_phi, -1.0, 1.0));
    if (cross2(wall.normal, ray) == 0.0) {
      rec.velocity_status = VelocityStatus::ambiguous_half_plane;
    } else if (std::abs(cos_phi) <= params.cos_phi_epsilon) {
      rec.velocity_status = VelocityStatus::near_perpendicular;
    } else {
      rec.v = reconstruct_velocity(x_v, best_xw, c, wall, rec.detection.v_r,
                                   params.cos_phi_epsilon);
    }
    out.push_back(rec);
  }
  return out;
}

void save_reconstructions(const std::string& path, std::size_t frame_index,
                          double timestamp,
                          const std::vector<NlosReconstruction>& recons) {
  std::string out;
  Json head;
  head["format"] = "nlos_reconstruction";
  head["version"] = 1;
  head["frame"] = frame_index;
  head["timestamp"] = timestamp;
  head["count"] = recons.size();
  out += head.dump();
  out += '\n';
  for (const NlosReconstruction& r : recons) {
    Json j;
    j["kind"] = r.kind == ReconKind::third_bounce ? "third_bounce" : "direct";
    j["x"] = {r.x.x(), r.x.y()};
    j["v"] = {r.v.x(), r.v.y()};
    j["v_r"] = r.detection.v_r;
    j["wall"] = r.wall_index;
    j["x_w"] = {r.x_w.x(), r.x_w.y()};
    j["velocity"] = to_string(r.velocity_status);
    j["phi"] = r.phi;
    j["gamma_v"] = r.gamma_v;
    j["gamma_w"] = r.gamma_w;
    j["source"] = {{"azimuth", r.detection.source.azimuth},
                   {"range", r.detection.source.range},
                   {"radial_velocity", r.detection.source.radial_velocity},
                   {"amplitude", r.detection.source.amplitude}};
    out += j.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

ReconstructionFrame load_reconstructions(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  ReconstructionFrame frame;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty reconstruction file");
  Json head = Json::parse(line);
  if (head.value("format", "") != "nlos_reconstruction")
    throw std::runtime_error(path + ": not a reconstruction file");
  frame.frame_index = head.at("frame").get<std::size_t>();
  frame.timestamp = head.at("timestamp").get<double>();
  const std::size_t count = head.at("count").get<std::size_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    NlosReconstruction r;
    r.kind = j.at("kind").get<std::string>() == "third_bounce" ? ReconKind::third_bounce
                                                               : ReconKind::direct;
    r.x = Vec2(j.at("x")[0].get<double>(), j.at("x")[1].get<double>());
    r.v = Vec2(j.at("v")[0].get<double>(), j.at("v")[1].get<double>());
    r.detection.v_r = j.at("v_r").get<double>();
    r.wall_index = j.at("wall").get<int>();
    r.x_w = Vec2(j.at("x_w")[0].get<double>(), j.at("x_w")[1].get<double>());
    const std::string vs = j.at("velocity").get<std::string>();
    if (vs == "ok") r.velocity_status = VelocityStatus::ok;
    else if (vs == "near_perpendicular") r.velocity_status = VelocityStatus::near_perpendicular;
    else if (vs == "ambiguous_half_plane") r.velocity_status = VelocityStatus::ambiguous_half_plane;
    else throw std::runtime_error(path + ": unknown velocity status '" + vs + "'");
    r.phi = j.at("phi").get<double>();
    r.gamma_v = j.at("gamma_v").get<double>();
    r.gamma_w = j.at("gamma_w").get<double>();
    const Json& s = j.at("source");
    r.detection.source.azimuth = s.at("azimuth").get<double>();
    r.detection.source.range = s.at("range").get<double>();
    r.detection.source.radial_velocity = s.at("radial_velocity").get<double>();
    r.detection.source.amplitude = s.at("amplitude").get<double>();
    r.detection.source.log_amplitude =
        r.detection.source.amplitude > 0.0 ? std::log(r.detection.source.amplitude) : 0.0;
    frame.recons.push_back(r);
  }
  if (frame.recons.size() != count)
    throw std::runtime_error(path + ": record count does not match header");
  return frame;
}

}  // namespace nlos
