#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "nlos/geometry.hpp"
#include "nlos/reconstruction.hpp"

namespace nlos {

enum class BoxClass { background, cyclist, pedestrian };

const char* to_string(BoxClass c);
BoxClass box_class_from_string(const std::string& s);

/// Rotated rectangle in the BEV plane. The length axis runs along yaw, the
/// width axis across it; yaw is normalized to [-pi/2, pi/2) since front and
/// back are indistinguishable. velocity is a signed scalar along the yaw
/// axis; velocity_vector keeps the full measured estimate for fusion.
struct OrientedBox {
  Vec2 center{0.0, 0.0};
  double width = 1.0;   // m, across the yaw axis
  double length = 1.0;  // m, along the yaw axis
  double yaw = 0.0;     // rad, [-pi/2, pi/2)
  double velocity = 0.0;
  BoxClass cls = BoxClass::pedestrian;
  double score = 1.0;
  Vec2 velocity_vector{0.0, 0.0};
  bool velocity_measured = false;

  std::array<Vec2, 4> corners() const;
  double area() const { return width * length; }
  Vec2 heading() const { return unit_vector(yaw); }
};

/// Dense two-channel grid rasterized from sparse BEV points: per cell the
/// signed radial velocity of the largest-magnitude point and the maximum
/// strength. Rows advance along +x from the origin corner, columns along +y.
struct PseudoImageSpec {
  Vec2 origin{0.0, -30.0};
  std::size_t height = 800;  // rows, +x
  std::size_t width = 600;   // cols, +y
  double cell_size = 0.1;    // m
};

struct PseudoImage {
  PseudoImageSpec spec;
  std::vector<double> velocity;
  std::vector<double> strength;

  std::size_t index(std::size_t row, std::size_t col) const {
    return row * spec.width + col;
  }
};

struct BevPoint {
  Vec2 position{0.0, 0.0};
  double radial_velocity = 0.0;
  double strength = 0.0;
};

PseudoImage rasterize(std::span<const BevPoint> points, const PseudoImageSpec& spec = {});

struct DetectParams {
  double cluster_radius = 0.75;  // m, density neighbourhood
  double min_weight = 2.25;      // weighted core/cluster support
  double valid_weight = 1.0;     // point with a reconstructed velocity vector
  double invalid_weight = 0.75;  // position-only point
  std::size_t min_points = 2;
  double min_size = 0.3;         // m, floor on box width and length
  double cyclist_speed = 2.5;    // m/s, faster clusters become cyclists
  double cyclist_length = 1.2;   // m, longer clusters become cyclists
  double score_support = 5.0;    // weight that saturates the score at 1
};

/// Density-based clustering over reconstructed positions, one oriented box
/// per cluster via the minimum-area enclosing rectangle. Cluster support is
/// weighted by velocity validity; the box speed is the amplitude-weighted
/// mean speed, signed along the box heading.
std::vector<OrientedBox> detect(const std::vector<NlosReconstruction>& recons,
                                const DetectParams& params = {});

/// Minimum-area enclosing rectangle of a point set (rotating calipers over
/// the convex hull). Sizes carry no floor here; degenerate sets collapse to
/// zero width and/or length.
OrientedBox min_area_rect(std::span<const Vec2> points);

struct BoxResiduals {
  double dx = 0.0;
  double dy = 0.0;
  double dv = 0.0;
  double dw = 0.0;
  double dl = 0.0;
  double dtheta = 0.0;
};

/// Regression residuals of a ground-truth box against an anchor: center and
/// velocity differences, log size ratios, sine of the yaw difference (both
/// yaws normalized to [-pi/2, pi/2) first). Throws for nonpositive sizes.
BoxResiduals box_residuals(const OrientedBox& gt, const OrientedBox& anchor);

struct LossWeights {
  double x = 1.0, y = 1.0, v = 1.0, w = 1.0, l = 1.0, theta = 1.0;
};

/// Weighted L1 sum of residuals accumulated over frames.
double localization_loss(const std::vector<std::vector<BoxResiduals>>& frames,
                         const LossWeights& weights = {});

/// Binary cross-entropy over anchor scores (clamped away from 0 and 1).
double classification_loss(std::span<const double> scores,
                           std::span<const int> is_positive);

inline double combined_loss(double loc, double cls, double alpha = 1.0,
                            double beta = 1.0) {
  return alpha * loc + beta * cls;
}

/// Newline-delimited box record stream shared by detections (id < 0) and
/// tracks (id >= 0). Field order is fixed:
/// frame, id, class, score, x, y, w, l, theta, v.
struct BoxRecord {
  std::size_t frame = 0;
  double timestamp = 0.0;
  int id = -1;
  OrientedBox box;
};

void save_box_records(const std::string& path, const std::vector<BoxRecord>& records);
std::vector<BoxRecord> load_box_records(const std::string& path);

}  // namespace nlos
