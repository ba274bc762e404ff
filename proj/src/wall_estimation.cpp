#include "nlos/wall_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "nlos/io_util.hpp"
#include "nlos/rng.hpp"

namespace nlos {
namespace {

struct LineFit {
  Vec2 centroid{0.0, 0.0};
  Vec2 direction{1.0, 0.0};  // unit
};

// Total least squares: principal axis of the covariance of the cells.
LineFit pca_line(const std::vector<Vec2>& cells, const std::vector<std::size_t>& idx) {
  LineFit fit;
  for (std::size_t k : idx) fit.centroid += cells[k];
  fit.centroid /= static_cast<double>(idx.size());
  double cxx = 0.0, cxy = 0.0, cyy = 0.0;
  for (std::size_t k : idx) {
    const Vec2 d = cells[k] - fit.centroid;
    cxx += d.x() * d.x();
    cxy += d.x() * d.y();
    cyy += d.y() * d.y();
  }
  const double theta = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
  fit.direction = Vec2(std::cos(theta), std::sin(theta));
  return fit;
}

double line_distance(const LineFit& fit, const Vec2& p) {
  return std::abs(cross2(fit.direction, p - fit.centroid));
}

// Candidate segment before orientation, endpoints on the fitted line.
struct Candidate {
  Vec2 e1{0.0, 0.0};
  Vec2 e2{0.0, 0.0};
  double length() const { return (e2 - e1).norm(); }
  Vec2 dir() const { return (e2 - e1).normalized(); }
};

}  // namespace

std::vector<WallSegment> estimate_walls(const LidarBev& bev,
                                        const Vec2& sensor_position,
                                        const WallEstimationParams& params) {
  if (bev.bin_size <= 0.0) throw std::invalid_argument("estimate_walls: bin_size must be positive");
  const double bin = bev.bin_size;

  // Binarize: one representative cell centre per occupied bin, ordered by
  // grid index so the fit does not depend on input point order.
  std::map<std::pair<long long, long long>, char> grid;
  for (const Vec2& p : bev.points) {
    const long long qx = static_cast<long long>(std::floor(p.x() / bin));
    const long long qy = static_cast<long long>(std::floor(p.y() / bin));
    grid.emplace(std::make_pair(qx, qy), 1);
  }
  std::vector<Vec2> cells;
  cells.reserve(grid.size());
  for (const auto& [q, unused] : grid)
    cells.emplace_back((static_cast<double>(q.first) + 0.5) * bin,
                       (static_cast<double>(q.second) + 0.5) * bin);

  const double tol = params.inlier_tolerance_bins * bin;
  const std::size_t min_support =
      std::max<std::size_t>(8, static_cast<std::size_t>(std::lround(0.5 * kMinWallLength / bin)));

  std::vector<char> alive(cells.size(), 1);
  RngStream rng(params.seed);
  std::vector<Candidate> segments;

  for (std::size_t round = 0; round < params.max_walls; ++round) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (alive[i]) pool.push_back(i);
    if (pool.size() < min_support) break;

    // RANSAC over cell pairs; best model by inlier count, first winner kept.
    std::size_t best_count = 0;
    LineFit best;
    for (int iter = 0; iter < params.ransac_iterations; ++iter) {
      const std::size_t i = rng.uniform_index(pool.size());
      std::size_t j = rng.uniform_index(pool.size() - 1);
      if (j >= i) ++j;
      const Vec2 a = cells[pool[i]];
      const Vec2 b = cells[pool[j]];
      if ((b - a).norm() < 10.0 * bin) continue;  // too close for a stable direction
      LineFit fit;
      fit.centroid = a;
      fit.direction = (b - a).normalized();
      std::size_t count = 0;
      for (std::size_t k : pool)
        if (line_distance(fit, cells[k]) <= tol) ++count;
      if (count > best_count) {
        best_count = count;
        best = fit;
      }
    }
    if (best_count < min_support) break;

    // Two refit rounds: PCA over inliers, then re-gather inliers.
    std::vector<std::size_t> inliers;
    for (int pass = 0; pass < 2; ++pass) {
      inliers.clear();
      for (std::size_t k : pool)
        if (line_distance(best, cells[k]) <= tol) inliers.push_back(k);
      if (inliers.size() < 2) break;
      best = pca_line(cells, inliers);
    }
    if (inliers.size() < min_support) break;

    // Split the inlier run at along-line gaps, keep pieces long enough.
    std::vector<std::pair<double, std::size_t>> proj;
    proj.reserve(inliers.size());
    for (std::size_t k : inliers)
      proj.emplace_back(best.direction.dot(cells[k] - best.centroid), k);
    std::sort(proj.begin(), proj.end());
    std::size_t run_begin = 0;
    for (std::size_t i = 1; i <= proj.size(); ++i) {
      if (i < proj.size() && proj[i].first - proj[i - 1].first <= params.split_gap) continue;
      const std::size_t run_len = i - run_begin;
      // Half a bin is added per end so a wall of exactly the minimum length
      // survives the centre-of-cell shrinkage.
      const double extent = proj[i - 1].first - proj[run_begin].first + bin;
      if (run_len >= 2 && extent >= kMinWallLength) {
        std::vector<std::size_t> run_cells;
        run_cells.reserve(run_len);
        for (std::size_t r = run_begin; r < i; ++r) run_cells.push_back(proj[r].second);
        LineFit rf = pca_line(cells, run_cells);
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (std::size_t k : run_cells) {
          const double t = rf.direction.dot(cells[k] - rf.centroid);
          if (first) {
            lo = hi = t;
            first = false;
          } else {
            lo = std::min(lo, t);
            hi = std::max(hi, t);
          }
        }
        Candidate c;
        c.e1 = rf.centroid + rf.direction * (lo - 0.5 * bin);
        c.e2 = rf.centroid + rf.direction * (hi + 0.5 * bin);
        segments.push_back(c);
      }
      run_begin = i;
    }

    // Consume every inlier, accepted run or not, so a short structure is not
    // rediscovered forever.
    for (std::size_t k : inliers) alive[k] = 0;
  }

  // Merge collinear neighbours (and overlaps) until stable.
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < segments.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < segments.size() && !merged; ++j) {
        const Candidate& a = segments[i];
        const Candidate& b = segments[j];
        const Vec2 da = a.dir();
        const Vec2 db = b.dir();
        if (std::abs(cross2(da, db)) > params.merge_angle) continue;
        const double off1 = std::abs(cross2(da, b.e1 - a.e1));
        const double off2 = std::abs(cross2(da, b.e2 - a.e1));
        if (std::max(off1, off2) > std::max(params.merge_lateral, 2.0 * bin)) continue;
        const double la = a.length();
        double t1 = da.dot(b.e1 - a.e1);
        double t2 = da.dot(b.e2 - a.e1);
        if (t1 > t2) std::swap(t1, t2);
        const double gap = std::max(t1 - la, -t2);
        if (gap >= params.merge_gap) continue;

        const double lb = b.length();
        Vec2 dm = (la * da + lb * (db.dot(da) >= 0.0 ? db : Vec2(-db))).normalized();
        const Vec2 cm = (la * 0.5 * (a.e1 + a.e2) + lb * 0.5 * (b.e1 + b.e2)) / (la + lb);
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (const Vec2& e : {a.e1, a.e2, b.e1, b.e2}) {
          const double t = dm.dot(e - cm);
          if (first) {
            lo = hi = t;
            first = false;
          } else {
            lo = std::min(lo, t);
            hi = std::max(hi, t);
          }
        }
        Candidate m;
        m.e1 = cm + dm * lo;
        m.e2 = cm + dm * hi;
        segments[i] = m;
        segments.erase(segments.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
    }
  }

  std::vector<WallSegment> walls;
  for (const Candidate& c : segments) {
    if (c.length() < kMinWallLength) continue;
    // A line through the sensor cannot be oriented (and is no relay surface).
    if (std::abs(cross2(c.dir(), sensor_position - c.e1)) < 1e-9) continue;
    walls.push_back(WallSegment::from_endpoints(c.e1, c.e2, sensor_position));
  }
  std::sort(walls.begin(), walls.end(), [](const WallSegment& x, const WallSegment& y) {
    const double lx = x.length(), ly = y.length();
    if (lx != ly) return lx > ly;
    const Vec2 mx = x.midpoint(), my = y.midpoint();
    if (mx.x() != my.x()) return mx.x() < my.x();
    return mx.y() < my.y();
  });
  return walls;
}

LidarBev sample_wall_bev(const Scenario& scenario, double spacing,
                         double noise_sigma, std::uint64_t seed) {
  if (spacing <= 0.0) throw std::invalid_argument("sample_wall_bev: spacing must be positive");
  LidarBev bev;
  RngStream rng(seed ^ scenario.rng_seed);
  const Vec2 c = scenario.sensor_pose.position;
  const double max_range = scenario.sensor.max_range;

  for (std::size_t w = 0; w < scenario.walls.size(); ++w) {
    const WallSegment& wall = scenario.walls[w];
    const int n = std::max(2, static_cast<int>(std::ceil(wall.length() / spacing)) + 1);
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(n - 1);
      Vec2 p = wall.p1 + t * (wall.p2 - wall.p1);
      if ((p - c).norm() > max_range) continue;
      bool blocked = false;
      for (std::size_t o = 0; o < scenario.walls.size() && !blocked; ++o) {
        if (o == w) continue;
        const WallSegment& other = scenario.walls[o];
        // Back off slightly from the sample so a shared corner endpoint does
        // not read as an occlusion of its own wall.
        const Vec2 q = c + (p - c) * (1.0 - 1e-9);
        blocked = segments_intersect(c, q, other.p1, other.p2);
      }
      if (blocked) continue;
      if (noise_sigma > 0.0)
        p += noise_sigma * Vec2(rng.gaussian(), rng.gaussian());
      bev.points.push_back(p);
    }
  }
  for (const ClutterPoint& cl : scenario.clutter) {
    Vec2 p = cl.position;
    if ((p - c).norm() > max_range) continue;
    if (line_of_sight_blocked(c, p, scenario.walls)) continue;
    if (noise_sigma > 0.0)
      p += noise_sigma * Vec2(rng.gaussian(), rng.gaussian());
    bev.points.push_back(p);
  }
  return bev;
}

void save_walls_csv(const std::string& path, const std::vector<WallSegment>& walls) {
  std::string out = "# nlos_walls v1\n";
  out += "p1x,p1y,p2x,p2y,nx,ny,reflectivity\n";
  char buf[256];
  for (const WallSegment& w : walls) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  w.p1.x(), w.p1.y(), w.p2.x(), w.p2.y(), w.normal.x(), w.normal.y(),
                  w.reflectivity);
    out += buf;
  }
  write_text_file(path, out);
}

std::vector<WallSegment> load_walls_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "# nlos_walls v1")
    throw std::runtime_error(path + ": not a wall CSV (missing format tag)");
  if (!std::getline(in, line) || line != "p1x,p1y,p2x,p2y,nx,ny,reflectivity")
    throw std::runtime_error(path + ": unexpected wall CSV header");
  std::vector<WallSegment> walls;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    WallSegment w;
    double vals[7];
    std::size_t pos = 0;
    for (int k = 0; k < 7; ++k) {
      const std::size_t comma = line.find(',', pos);
      const std::string field =
          line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        vals[k] = std::stod(field);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number '" + field + "'");
      }
      if (k < 6) {
        if (comma == std::string::npos)
          throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 7 fields");
        pos = comma + 1;
      }
    }
    w.p1 = Vec2(vals[0], vals[1]);
    w.p2 = Vec2(vals[2], vals[3]);
    w.normal = Vec2(vals[4], vals[5]);
    w.reflectivity = vals[6];
    const double len = (w.p2 - w.p1).norm();
    if (len < kMinWallLength)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": wall shorter than minimum");
    w.direction = (w.p2 - w.p1) / len;
    if ((rot90_ccw(w.normal) - w.direction).norm() > 1e-6)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": normal inconsistent with endpoints");
    w.normal = rot90_cw(w.direction);  // renormalize exactly
    walls.push_back(w);
  }
  return walls;
}

}  // namespace nlos
