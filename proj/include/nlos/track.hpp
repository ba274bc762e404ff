#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nlos/detect.hpp"

namespace nlos {

struct TrackerParams {
  double gate = 2.0;                  // m, max predicted-center distance for a match
  double velocity_cost_weight = 0.5;  // s, scales the velocity mismatch in the cost
  int max_misses = 5;                 // consecutive misses before the track dies
  int max_coast = 2;                  // missed frames still reported via prediction
  bool fuse_velocity = true;          // feed measured velocity into the filter
  double accel_noise = 2.0;           // m/s^2, white-acceleration process noise
  double pos_noise = 0.15;            // m, measurement sigma of a box center
  double vel_noise = 0.5;             // m/s, measurement sigma of a box velocity
};

/// One tracked object: constant-velocity Kalman state [px py vx vy] plus the
/// reported box history. The id never changes over the track's lifetime.
struct Track {
  int id = 0;
  Eigen::Vector4d state = Eigen::Vector4d::Zero();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
  std::vector<OrientedBox> boxes;  // reported box per visible frame, time order
  int missed_count = 0;
  bool matched = false;   // this frame
  bool reported = false;  // matched or coasting this frame
  OrientedBox current;    // valid when reported

  Vec2 position() const { return state.head<2>(); }
  Vec2 velocity() const { return state.tail<2>(); }
};

/// One step of predict/associate/update. Tracks are predicted dt forward,
/// detections are matched greedily by predicted-center distance (plus a
/// velocity term when both sides carry one) under the gate, matched tracks
/// are corrected, unmatched detections spawn tracks with ids from next_id,
/// and tracks that missed max_misses frames in a row are dropped. A track
/// that misses at most max_coast frames keeps reporting its prediction.
std::vector<Track> track_update(std::vector<Track> tracks,
                                const std::vector<OrientedBox>& detections,
                                double dt, int& next_id,
                                const TrackerParams& params = {});

/// Constant-velocity extrapolation: the current box plus n future copies
/// whose centers advance by the track velocity; size, yaw and class held.
std::vector<OrientedBox> predict_future(const Track& track, int n, double dt);

/// Stateful convenience wrapper around track_update.
class Tracker {
 public:
  explicit Tracker(const TrackerParams& params = {}) : params_(params) {}

  const std::vector<Track>& update(const std::vector<OrientedBox>& detections, double dt) {
    tracks_ = track_update(std::move(tracks_), detections, dt, next_id_, params_);
    return tracks_;
  }

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerParams& params() const { return params_; }

 private:
  TrackerParams params_;
  std::vector<Track> tracks_;
  int next_id_ = 0;
};

}  // namespace nlos
