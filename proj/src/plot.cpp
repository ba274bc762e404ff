#include "nlos/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "nlos/io_util.hpp"

namespace nlos {

void PlotExtent::include(const Vec2& p) {
  min.x() = std::min(min.x(), p.x());
  min.y() = std::min(min.y(), p.y());
  max.x() = std::max(max.x(), p.x());
  max.y() = std::max(max.y(), p.y());
}

void PlotExtent::pad(double meters) {
  min.array() -= meters;
  max.array() += meters;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

SvgPlot::SvgPlot(const PlotExtent& extent, const PlotStyle& style)
    : extent_(extent), style_(style) {
  if (!extent_.valid()) extent_.pad(1.0);
  width_px_ = (extent_.max.x() - extent_.min.x()) * style_.pixels_per_meter +
              2.0 * style_.margin_px;
  height_px_ = (extent_.max.y() - extent_.min.y()) * style_.pixels_per_meter +
               2.0 * style_.margin_px;
}

Vec2 SvgPlot::to_px(const Vec2& world) const {
  return Vec2(
      style_.margin_px + (world.x() - extent_.min.x()) * style_.pixels_per_meter,
      style_.margin_px + (extent_.max.y() - world.y()) * style_.pixels_per_meter);
}

void SvgPlot::grid() {
  if (style_.grid_spacing <= 0.0) return;
  const double s = style_.grid_spacing;
  for (double x = std::ceil(extent_.min.x() / s) * s; x <= extent_.max.x(); x += s) {
    const Vec2 a = to_px(Vec2(x, extent_.min.y()));
    const Vec2 b = to_px(Vec2(x, extent_.max.y()));
    body_ += "<line x1=\"" + fmt(a.x()) + "\" y1=\"" + fmt(a.y()) + "\" x2=\"" +
             fmt(b.x()) + "\" y2=\"" + fmt(b.y()) +
             "\" stroke=\"#eceff1\" stroke-width=\"1\"/>\n";
    text(Vec2(x, extent_.min.y()), fmt(x), 9.0, "#b0bec5");
  }
  for (double y = std::ceil(extent_.min.y() / s) * s; y <= extent_.max.y(); y += s) {
    const Vec2 a = to_px(Vec2(extent_.min.x(), y));
    const Vec2 b = to_px(Vec2(extent_.max.x(), y));
    body_ += "<line x1=\"" + fmt(a.x()) + "\" y1=\"" + fmt(a.y()) + "\" x2=\"" +
             fmt(b.x()) + "\" y2=\"" + fmt(b.y()) +
             "\" stroke=\"#eceff1\" stroke-width=\"1\"/>\n";
  }
}

void SvgPlot::wall(const WallSegment& w, const std::string& color,
                   double width_px) {
  line(w.p1, w.p2, color, width_px);
  // Short whisker marking the reflective face.
  const Vec2 mid = w.midpoint();
  line(mid, mid + 0.4 * w.normal, color, std::max(1.0, width_px / 2.0), 0.8);
}

void SvgPlot::marker(const Vec2& p, const std::string& color, double radius_px,
                     double opacity) {
  const Vec2 c = to_px(p);
  body_ += "<circle cx=\"" + fmt(c.x()) + "\" cy=\"" + fmt(c.y()) + "\" r=\"" +
           fmt(radius_px) + "\" fill=\"" + color + "\" fill-opacity=\"" +
           fmt(opacity) + "\"/>\n";
}

void SvgPlot::line(const Vec2& a, const Vec2& b, const std::string& color,
                   double width_px, double opacity, bool dashed) {
  const Vec2 pa = to_px(a), pb = to_px(b);
  body_ += "<line x1=\"" + fmt(pa.x()) + "\" y1=\"" + fmt(pa.y()) + "\" x2=\"" +
           fmt(pb.x()) + "\" y2=\"" + fmt(pb.y()) + "\" stroke=\"" + color +
           "\" stroke-width=\"" + fmt(width_px) + "\" stroke-opacity=\"" +
           fmt(opacity) + "\"";
  if (dashed) body_ += " stroke-dasharray=\"6 4\"";
  body_ += "/>\n";
}

void SvgPlot::box(const OrientedBox& b, const std::string& color,
                  double width_px, bool dashed) {
  const auto corners = b.corners();
  std::string pts;
  for (const Vec2& c : corners) {
    const Vec2 p = to_px(c);
    pts += fmt(p.x()) + "," + fmt(p.y()) + " ";
  }
  body_ += "<polygon points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"" + fmt(width_px) + "\"";
  if (dashed) body_ += " stroke-dasharray=\"5 3\"";
  body_ += "/>\n";
  // Tick along the heading so orientation is visible.
  const Vec2 h = b.heading();
  line(b.center, b.center + 0.5 * b.length * h, color, width_px, 0.9);
}

void SvgPlot::velocity_ray(const Vec2& origin, const Vec2& v,
                           const std::string& color, double seconds) {
  if (v.norm() < 1e-9) return;
  line(origin, origin + seconds * v, color, 1.5, 0.9);
  marker(origin + seconds * v, color, 2.0, 0.9);
}

void SvgPlot::sensor(const Pose2D& pose) {
  marker(pose.position, "#1565c0", 5.0);
  const Vec2 fwd = unit_vector(pose.yaw);
  line(pose.position, pose.position + 1.5 * fwd, "#1565c0", 2.0);
  text(pose.position + Vec2(0.3, 0.3), "sensor", 11.0, "#1565c0");
}

void SvgPlot::text(const Vec2& anchor, const std::string& s, double size_px,
                   const std::string& color) {
  const Vec2 p = to_px(anchor);
  body_ += "<text x=\"" + fmt(p.x()) + "\" y=\"" + fmt(p.y()) +
           "\" font-size=\"" + fmt(size_px) +
           "\" font-family=\"sans-serif\" fill=\"" + color + "\">" +
           escape_xml(s) + "</text>\n";
}

std::string SvgPlot::svg() const {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    fmt(width_px_) + "\" height=\"" + fmt(height_px_) +
                    "\" viewBox=\"0 0 " + fmt(width_px_) + " " + fmt(height_px_) +
                    "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out += body_;
  out += "</svg>\n";
  return out;
}

void SvgPlot::save(const std::filesystem::path& path) const {
  write_text_file(path, svg());
}

std::string render_frame_svg(const Scenario& scenario,
                             const std::vector<WallSegment>& estimated_walls,
                             const PointCloud& cloud, const Pose2D& sensor_pose,
                             const std::vector<NlosReconstruction>& recons,
                             const std::vector<BoxRecord>& track_boxes,
                             const std::vector<GtBox>& ground_truth,
                             std::size_t frame) {
  PlotExtent ext;
  ext.min = ext.max = sensor_pose.position;
  for (const WallSegment& w : scenario.walls) {
    ext.include(w.p1);
    ext.include(w.p2);
  }
  for (const GtBox& g : ground_truth) ext.include(g.box.center);
  for (const NlosReconstruction& r : recons) ext.include(r.x);
  for (const BoxRecord& b : track_boxes) ext.include(b.box.center);
  ext.pad(3.0);

  SvgPlot plot(ext);
  plot.grid();
  for (const WallSegment& w : scenario.walls) plot.wall(w);
  for (const WallSegment& w : estimated_walls) plot.wall(w, "#8e24aa", 1.5);

  for (const RadarPoint& p : cloud.points)
    plot.marker(to_cartesian(p, sensor_pose), "#90a4ae", 1.5, 0.6);

  for (const NlosReconstruction& r : recons) {
    const bool mirrored = r.kind == ReconKind::third_bounce;
    plot.marker(r.x, mirrored ? "#e53935" : "#1e88e5", 2.5, 0.9);
    if (r.velocity_valid()) plot.velocity_ray(r.x, r.v, "#fb8c00");
  }

  for (const GtBox& g : ground_truth) {
    plot.box(g.box, g.visibility == Visibility::nlos ? "#6d4c41" : "#455a64",
             1.5, true);
  }
  for (const BoxRecord& b : track_boxes) {
    plot.box(b.box, "#2e7d32", 2.0);
    plot.velocity_ray(b.box.center, b.box.velocity * b.box.heading(), "#2e7d32");
    if (b.id >= 0)
      plot.text(b.box.center + Vec2(0.3, 0.4), std::to_string(b.id), 11.0,
                "#2e7d32");
  }

  plot.sensor(sensor_pose);
  plot.text(Vec2(ext.min.x() + 0.5, ext.max.y() - 0.5),
            scenario.name + "  frame " + std::to_string(frame), 13.0);
  return plot.svg();
}

}  // namespace nlos
