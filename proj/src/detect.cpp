#include "nlos/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "nlos/io_util.hpp"
#include <json.hpp>

namespace nlos {

using Json = nlohmann::ordered_json;

const char* to_string(BoxClass c) {
  switch (c) {
    case BoxClass::background: return "background";
    case BoxClass::cyclist: return "cyclist";
    case BoxClass::pedestrian: return "pedestrian";
  }
  return "?";
}

BoxClass box_class_from_string(const std::string& s) {
  if (s == "background") return BoxClass::background;
  if (s == "cyclist") return BoxClass::cyclist;
  if (s == "pedestrian") return BoxClass::pedestrian;
  throw std::invalid_argument("unknown box class '" + s + "'");
}

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 u = unit_vector(yaw) * (0.5 * length);
  const Vec2 v = rot90_ccw(unit_vector(yaw)) * (0.5 * width);
  return {center + u + v, center - u + v, center - u - v, center + u - v};
}

PseudoImage rasterize(std::span<const BevPoint> points, const PseudoImageSpec& spec) {
  if (spec.cell_size <= 0.0) throw std::invalid_argument("rasterize: cell_size must be positive");
  if (spec.height == 0 || spec.width == 0)
    throw std::invalid_argument("rasterize: empty grid");
  PseudoImage img;
  img.spec = spec;
  img.velocity.assign(spec.height * spec.width, 0.0);
  img.strength.assign(spec.height * spec.width, 0.0);

  for (const BevPoint& p : points) {
    const double fr = (p.position.x() - spec.origin.x()) / spec.cell_size;
    const double fc = (p.position.y() - spec.origin.y()) / spec.cell_size;
    if (fr < 0.0 || fc < 0.0) continue;
    const auto row = static_cast<std::size_t>(fr);
    const auto col = static_cast<std::size_t>(fc);
    if (row >= spec.height || col >= spec.width) continue;
    const std::size_t i = img.index(row, col);
    if (std::abs(p.radial_velocity) > std::abs(img.velocity[i]))
      img.velocity[i] = p.radial_velocity;
    img.strength[i] = std::max(img.strength[i], p.strength);
  }
  return img;
}

namespace {

// Andrew monotone chain; returns the hull counterclockwise without repeats.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a == b; }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

OrientedBox min_area_rect(std::span<const Vec2> points) {
  if (points.empty()) throw std::invalid_argument("min_area_rect: no points");
  const std::vector<Vec2> hull = convex_hull({points.begin(), points.end()});

  OrientedBox box;
  if (hull.size() == 1) {
    box.center = hull[0];
    box.width = box.length = 0.0;
    box.yaw = 0.0;
    return box;
  }

  double best_area = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < hull.size(); ++e) {
    const Vec2 edge = hull[(e + 1) % hull.size()] - hull[e];
    const double len = edge.norm();
    if (len < 1e-12) continue;
    const Vec2 u = edge / len;
    const Vec2 v = rot90_ccw(u);
    double ulo = 0.0, uhi = 0.0, vlo = 0.0, vhi = 0.0;
    bool first = true;
    for (const Vec2& p : hull) {
      const Vec2 d = p - hull[e];
      const double pu = u.dot(d), pv = v.dot(d);
      if (first) {
        ulo = uhi = pu;
        vlo = vhi = pv;
        first = false;
      } else {
        ulo = std::min(ulo, pu);
        uhi = std::max(uhi, pu);
        vlo = std::min(vlo, pv);
        vhi = std::max(vhi, pv);
      }
    }
    const double area = (uhi - ulo) * (vhi - vlo);
    if (area < best_area) {
      best_area = area;
      const Vec2 center =
          hull[e] + u * (0.5 * (ulo + uhi)) + v * (0.5 * (vlo + vhi));
      const double eu = uhi - ulo, ev = vhi - vlo;
      box.center = center;
      // The long axis defines the heading.
      if (eu >= ev) {
        box.length = eu;
        box.width = ev;
        box.yaw = wrap_half_pi(std::atan2(u.y(), u.x()));
      } else {
        box.length = ev;
        box.width = eu;
        box.yaw = wrap_half_pi(std::atan2(v.y(), v.x()));
      }
    }
  }
  if (!std::isfinite(best_area)) {  // all hull edges degenerate
    box.center = hull[0];
    box.width = box.length = 0.0;
    box.yaw = 0.0;
  }
  return box;
}

std::vector<OrientedBox> detect(const std::vector<NlosReconstruction>& recons,
                                const DetectParams& params) {
  if (params.cluster_radius <= 0.0)
    throw std::invalid_argument("detect: cluster_radius must be positive");
  const std::size_t n = recons.size();
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i)
    weight[i] = recons[i].velocity_valid() ? params.valid_weight : params.invalid_weight;

  // Grid hash at the neighbourhood radius: candidates live in the 3x3 block.
  const double eps = params.cluster_radius;
  std::map<std::pair<long long, long long>, std::vector<std::size_t>> grid;
  auto cell_of = [eps](const Vec2& p) {
    return std::make_pair(static_cast<long long>(std::floor(p.x() / eps)),
                          static_cast<long long>(std::floor(p.y() / eps)));
  };
  for (std::size_t i = 0; i < n; ++i) grid[cell_of(recons[i].x)].push_back(i);

  auto neighbours = [&](std::size_t i) {
    std::vector<std::size_t> out;
    const auto [cx, cy] = cell_of(recons[i].x);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find({cx + dx, cy + dy});
        if (it == grid.end()) continue;
        for (std::size_t j : it->second)
          if ((recons[j].x - recons[i].x).norm() <= eps) out.push_back(j);
      }
    std::sort(out.begin(), out.end());
    return out;
  };

  // Weighted DBSCAN: a point is core when the weight inside eps (itself
  // included) reaches min_weight; clusters grow from cores, border points
  // attach to the first core that reaches them.
  constexpr int kNoise = -1, kUnvisited = -2;
  std::vector<int> label(n, kUnvisited);
  int next_cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    auto nb = neighbours(i);
    double w = 0.0;
    for (std::size_t j : nb) w += weight[j];
    if (w < params.min_weight) {
      label[i] = kNoise;
      continue;
    }
    const int cluster = next_cluster++;
    label[i] = cluster;
    std::vector<std::size_t> frontier = nb;
    while (!frontier.empty()) {
      const std::size_t j = frontier.back();
      frontier.pop_back();
      if (label[j] == kNoise) label[j] = cluster;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = cluster;
      auto nb2 = neighbours(j);
      double w2 = 0.0;
      for (std::size_t k : nb2) w2 += weight[k];
      if (w2 >= params.min_weight)
        frontier.insert(frontier.end(), nb2.begin(), nb2.end());
    }
  }

  std::vector<OrientedBox> boxes;
  for (int c = 0; c < next_cluster; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (label[i] == c) members.push_back(i);
    if (members.size() < params.min_points) continue;
    double total_weight = 0.0;
    for (std::size_t i : members) total_weight += weight[i];
    if (total_weight < params.min_weight) continue;

    std::vector<Vec2> pts;
    pts.reserve(members.size());
    for (std::size_t i : members) pts.push_back(recons[i].x);
    OrientedBox box = min_area_rect(pts);
    box.width = std::max(box.width, params.min_size);
    box.length = std::max(box.length, params.min_size);

    // Amplitude-weighted mean of speed and of the velocity vector over the
    // points that carry a full velocity estimate.
    double amp_sum = 0.0, speed_sum = 0.0;
    Vec2 vel_sum{0.0, 0.0};
    for (std::size_t i : members) {
      if (!recons[i].velocity_valid()) continue;
      const double a = std::max(recons[i].detection.source.amplitude, 1e-300);
      amp_sum += a;
      speed_sum += a * recons[i].v.norm();
      vel_sum += a * recons[i].v;
    }
    if (amp_sum > 0.0) {
      box.velocity_measured = true;
      box.velocity_vector = vel_sum / amp_sum;
      const double speed = speed_sum / amp_sum;
      const double along = box.velocity_vector.dot(box.heading());
      box.velocity = (along < 0.0 ? -1.0 : 1.0) * speed;
    }

    const double speed = std::abs(box.velocity);
    box.cls = (speed > params.cyclist_speed || box.length > params.cyclist_length)
                  ? BoxClass::cyclist
                  : BoxClass::pedestrian;
    box.score = std::min(1.0, total_weight / params.score_support);
    boxes.push_back(box);
  }

  std::sort(boxes.begin(), boxes.end(), [](const OrientedBox& a, const OrientedBox& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.center.x() != b.center.x()) return a.center.x() < b.center.x();
    return a.center.y() < b.center.y();
  });
  return boxes;
}

BoxResiduals box_residuals(const OrientedBox& gt, const OrientedBox& anchor) {
  if (gt.width <= 0.0 || gt.length <= 0.0 || anchor.width <= 0.0 || anchor.length <= 0.0)
    throw std::invalid_argument("box_residuals: sizes must be positive");
  BoxResiduals r;
  r.dx = gt.center.x() - anchor.center.x();
  r.dy = gt.center.y() - anchor.center.y();
  r.dv = gt.velocity - anchor.velocity;
  r.dw = std::log(gt.width / anchor.width);
  r.dl = std::log(gt.length / anchor.length);
  r.dtheta = std::sin(wrap_half_pi(gt.yaw) - wrap_half_pi(anchor.yaw));
  return r;
}

double localization_loss(const std::vector<std::vector<BoxResiduals>>& frames,
                         const LossWeights& weights) {
  double loss = 0.0;
  for (const auto& frame : frames)
    for (const BoxResiduals& r : frame)
      loss += weights.x * std::abs(r.dx) + weights.y * std::abs(r.dy) +
              weights.v * std::abs(r.dv) + weights.w * std::abs(r.dw) +
              weights.l * std::abs(r.dl) + weights.theta * std::abs(r.dtheta);
  return loss;
}

double classification_loss(std::span<const double> scores,
                           std::span<const int> is_positive) {
  if (scores.size() != is_positive.size())
    throw std::invalid_argument("classification_loss: size mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = std::clamp(scores[i], 1e-12, 1.0 - 1e-12);
    loss += is_positive[i] ? -std::log(s) : -std::log(1.0 - s);
  }
  return loss;
}

void save_box_records(const std::string& path, const std::vector<BoxRecord>& records) {
  std::string out;
  Json head;
  head["format"] = "nlos_boxes";
  head["version"] = 1;
  head["count"] = records.size();
  out += head.dump();
  out += '\n';
  for (const BoxRecord& r : records) {
    Json j;
    j["frame"] = r.frame;
    j["timestamp"] = r.timestamp;
    j["id"] = r.id;
    j["class"] = to_string(r.box.cls);
    j["score"] = r.box.score;
    j["x"] = r.box.center.x();
    j["y"] = r.box.center.y();
    j["w"] = r.box.width;
    j["l"] = r.box.length;
    j["theta"] = r.box.yaw;
    j["v"] = r.box.velocity;
    j["vx"] = r.box.velocity_vector.x();
    j["vy"] = r.box.velocity_vector.y();
    j["v_measured"] = r.box.velocity_measured;
    out += j.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<BoxRecord> load_box_records(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty box file");
  Json head = Json::parse(line);
  if (head.value("format", "") != "nlos_boxes")
    throw std::runtime_error(path + ": not a box record file");
  const std::size_t count = head.at("count").get<std::size_t>();
  std::vector<BoxRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    BoxRecord r;
    r.frame = j.at("frame").get<std::size_t>();
    r.timestamp = j.at("timestamp").get<double>();
    r.id = j.at("id").get<int>();
    r.box.cls = box_class_from_string(j.at("class").get<std::string>());
    r.box.score = j.at("score").get<double>();
    r.box.center = Vec2(j.at("x").get<double>(), j.at("y").get<double>());
    r.box.width = j.at("w").get<double>();
    r.box.length = j.at("l").get<double>();
    r.box.yaw = j.at("theta").get<double>();
    r.box.velocity = j.at("v").get<double>();
    r.box.velocity_vector = Vec2(j.value("vx", 0.0), j.value("vy", 0.0));
    r.box.velocity_measured = j.value("v_measured", false);
    records.push_back(r);
  }
  if (records.size() != count)
    throw std::runtime_error(path + ": record count does not match header");
  return records;
}

}  // namespace nlos
