#include "nlos/track.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlos {

namespace {

Eigen::Matrix4d transition(double dt) {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

// White-acceleration process noise, block per axis.
Eigen::Matrix4d process_noise(double dt, double accel_sigma) {
  const double q = accel_sigma * accel_sigma;
  const double dt2 = dt * dt, dt3 = dt2 * dt;
  Eigen::Matrix4d n = Eigen::Matrix4d::Zero();
  n(0, 0) = n(1, 1) = q * dt3 / 3.0;
  n(0, 2) = n(2, 0) = n(1, 3) = n(3, 1) = q * dt2 / 2.0;
  n(2, 2) = n(3, 3) = q * dt;
  return n;
}

void kalman_update(Track& t, const Eigen::VectorXd& z, const Eigen::MatrixXd& h,
                   const Eigen::MatrixXd& r) {
  const Eigen::VectorXd innovation = z - h * t.state;
  const Eigen::MatrixXd s = h * t.cov * h.transpose() + r;
  const Eigen::MatrixXd k = t.cov * h.transpose() * s.inverse();
  t.state += k * innovation;
  t.cov = (Eigen::Matrix4d::Identity() - k * h) * t.cov;
}

}  // namespace

std::vector<Track> track_update(std::vector<Track> tracks,
                                const std::vector<OrientedBox>& detections,
                                double dt, int& next_id,
                                const TrackerParams& params) {
  if (dt <= 0.0) throw std::invalid_argument("track_update: dt must be positive");

  const Eigen::Matrix4d f = transition(dt);
  const Eigen::Matrix4d q = process_noise(dt, params.accel_noise);
  for (Track& t : tracks) {
    t.state = f * t.state;
    t.cov = f * t.cov * f.transpose() + q;
    t.matched = false;
    t.reported = false;
  }

  // Greedy global-nearest assignment under the gate. The cost is the
  // predicted-center distance plus a weighted velocity mismatch when both
  // the track and the detection carry a velocity estimate.
  struct Pair {
    double cost;
    std::size_t track;
    std::size_t det;
  };
  std::vector<Pair> pairs;
  for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
    for (std::size_t di = 0; di < detections.size(); ++di) {
      const double dist = (tracks[ti].position() - detections[di].center).norm();
      if (dist > params.gate) continue;
      double cost = dist;
      if (params.fuse_velocity && detections[di].velocity_measured)
        cost += params.velocity_cost_weight *
                (tracks[ti].velocity() - detections[di].velocity_vector).norm();
      pairs.push_back({cost, ti, di});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.track != b.track) return a.track < b.track;
    return a.det < b.det;
  });

  std::vector<char> det_used(detections.size(), 0);
  for (const Pair& p : pairs) {
    if (tracks[p.track].matched || det_used[p.det]) continue;
    Track& t = tracks[p.track];
    const OrientedBox& d = detections[p.det];
    t.matched = true;
    det_used[p.det] = 1;
    t.missed_count = 0;

    if (params.fuse_velocity && d.velocity_measured) {
      Eigen::Vector4d z;
      z << d.center.x(), d.center.y(), d.velocity_vector.x(), d.velocity_vector.y();
      Eigen::Matrix4d r = Eigen::Matrix4d::Zero();
      r(0, 0) = r(1, 1) = params.pos_noise * params.pos_noise;
      r(2, 2) = r(3, 3) = params.vel_noise * params.vel_noise;
      kalman_update(t, z, Eigen::Matrix4d::Identity(), r);
    } else {
      Eigen::Vector2d z(d.center.x(), d.center.y());
      Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
      h(0, 0) = h(1, 1) = 1.0;
      kalman_update(t, z, h,
                    Eigen::Matrix2d::Identity() * params.pos_noise * params.pos_noise);
    }

    // The reported box is the detection itself; only the scalar velocity is
    // replaced by the smoothed estimate projected on the box heading.
    t.current = d;
    const Vec2 v = t.velocity();
    const double along = v.dot(d.heading());
    t.current.velocity = (along < 0.0 ? -1.0 : 1.0) * v.norm();
    t.current.velocity_vector = v;
    t.current.velocity_measured = true;
    t.reported = true;
    t.boxes.push_back(t.current);
  }

  for (Track& t : tracks) {
    if (t.matched) continue;
    ++t.missed_count;
    if (t.missed_count <= params.max_coast && !t.boxes.empty()) {
      t.current = t.boxes.back();
      t.current.center = t.position();
      t.current.velocity_vector = t.velocity();
      t.reported = true;
      t.boxes.push_back(t.current);
    }
  }
  std::erase_if(tracks, [&](const Track& t) { return t.missed_count >= params.max_misses; });

  for (std::size_t di = 0; di < detections.size(); ++di) {
    if (det_used[di]) continue;
    const OrientedBox& d = detections[di];
    Track t;
    t.id = next_id++;
    const bool with_vel = d.velocity_measured && params.fuse_velocity;
    const Vec2 v_init = with_vel ? d.velocity_vector : Vec2(0.0, 0.0);
    t.state << d.center.x(), d.center.y(), v_init.x(), v_init.y();
    Eigen::Matrix4d p0 = Eigen::Matrix4d::Zero();
    p0(0, 0) = p0(1, 1) = params.pos_noise * params.pos_noise;
    const double v0 = with_vel ? params.vel_noise : 2.0;
    p0(2, 2) = p0(3, 3) = v0 * v0;
    t.cov = p0;
    t.matched = true;
    t.reported = true;
    t.current = d;
    t.boxes.push_back(d);
    tracks.push_back(t);
  }

  return tracks;
}

std::vector<OrientedBox> predict_future(const Track& track, int n, double dt) {
  if (track.boxes.empty())
    throw std::invalid_argument("predict_future: track has no boxes");
  if (n < 0 || dt <= 0.0)
    throw std::invalid_argument("predict_future: need n >= 0 and dt > 0");
  std::vector<OrientedBox> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  OrientedBox box = track.boxes.back();
  box.center = track.position();
  const Vec2 v = track.velocity();
  for (int k = 0; k <= n; ++k) {
    OrientedBox b = box;
    b.center = box.center + static_cast<double>(k) * dt * v;
    out.push_back(b);
  }
  return out;
}

}  // namespace nlos
