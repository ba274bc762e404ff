#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nlos/detect.hpp"
#include "nlos/dsp.hpp"
#include "nlos/evaluation.hpp"
#include "nlos/reconstruction.hpp"
#include "nlos/scene.hpp"

namespace nlos {

struct PlotExtent {
  Vec2 min{0.0, 0.0};
  Vec2 max{1.0, 1.0};

  void include(const Vec2& p);
  void pad(double meters);
  bool valid() const { return max.x() > min.x() && max.y() > min.y(); }
};

struct PlotStyle {
  double pixels_per_meter = 18.0;
  double margin_px = 36.0;
  double grid_spacing = 5.0;  // m, 0 turns the grid off
};

/// Static bird's-eye SVG: world coordinates in meters, y up.
class SvgPlot {
 public:
  explicit SvgPlot(const PlotExtent& extent, const PlotStyle& style = {});

  void grid();
  void wall(const WallSegment& w, const std::string& color = "#37474f",
            double width_px = 3.0);
  void marker(const Vec2& p, const std::string& color, double radius_px = 2.0,
              double opacity = 1.0);
  void line(const Vec2& a, const Vec2& b, const std::string& color,
            double width_px = 1.0, double opacity = 1.0, bool dashed = false);
  void box(const OrientedBox& b, const std::string& color,
           double width_px = 1.5, bool dashed = false);
  /// Segment from the origin along v, scaled to `seconds` of travel.
  void velocity_ray(const Vec2& origin, const Vec2& v,
                    const std::string& color, double seconds = 1.0);
  void sensor(const Pose2D& pose);
  void text(const Vec2& anchor, const std::string& s, double size_px = 12.0,
            const std::string& color = "#263238");

  Vec2 to_px(const Vec2& world) const;
  std::string svg() const;
  void save(const std::filesystem::path& path) const;

 private:
  PlotExtent extent_;
  PlotStyle style_;
  double width_px_ = 0.0;
  double height_px_ = 0.0;
  std::string body_;
};

/// One pipeline frame in one picture: true and estimated walls, the radar
/// point cloud, reconstructed positions with velocity rays, tracked boxes
/// and ground truth outlines.
std::string render_frame_svg(const Scenario& scenario,
                             const std::vector<WallSegment>& estimated_walls,
                             const PointCloud& cloud, const Pose2D& sensor_pose,
                             const std::vector<NlosReconstruction>& recons,
                             const std::vector<BoxRecord>& track_boxes,
                             const std::vector<GtBox>& ground_truth,
                             std::size_t frame);

}  // namespace nlos
