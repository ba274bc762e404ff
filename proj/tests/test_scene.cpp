#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlos/rng.hpp"
#include "nlos/scene.hpp"
#include "nlos/scene_io.hpp"

using namespace nlos;

TEST_CASE("mid range sensor resolutions") {
  const SensorConfig c = SensorConfig::mid_range();
  CHECK(c.range_resolution == doctest::Approx(0.149896229).epsilon(1e-9));
  CHECK(c.velocity_resolution == doctest::Approx(0.0867312).epsilon(1e-4));
  CHECK(c.velocity_resolution <= 0.087);
  CHECK(c.angle_resolution == doctest::Approx(2.0 / 64.0).epsilon(1e-12));
  CHECK(c.frame_duration() == doctest::Approx(0.0225920).epsilon(1e-9));
  CHECK(c.max_unambiguous_velocity() == doctest::Approx(2.77540).epsilon(1e-4));
  CHECK(c.max_range <= c.num_samples_per_chirp * c.range_resolution);
  CHECK(c.invariant_errors().empty());
}

TEST_CASE("sensor invariants reject bad configs") {
  SensorConfig c = SensorConfig::mid_range();
  c.antenna_spacing = 0.6 * c.wavelength();
  CHECK(!c.invariant_errors().empty());

  c = SensorConfig::mid_range();
  c.velocity_resolution *= 1.001;
  CHECK(!c.invariant_errors().empty());

  c = SensorConfig::mid_range();
  c.ramp_time = c.chirp_period * 1.5;
  CHECK(!c.invariant_errors().empty());

  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("stationary linear trajectory") {
  const Trajectory t = Trajectory::linear({10.0, 5.0}, {0.0, 0.0});
  const State2D s = t.state_at(0.5);
  CHECK(s.position.x() == doctest::Approx(10.0));
  CHECK(s.position.y() == doctest::Approx(5.0));
  CHECK(s.velocity.norm() == doctest::Approx(0.0));
}

TEST_CASE("keyframe interpolation") {
  const Trajectory t = Trajectory::keyframes({{0.0, {0.0, 0.0}}, {2.0, {2.0, 0.0}}});
  const State2D s = t.state_at(1.0);
  CHECK(s.position.x() == doctest::Approx(1.0));
  CHECK(s.position.y() == doctest::Approx(0.0));
  CHECK(s.velocity.x() == doctest::Approx(1.0));
  CHECK(s.velocity.y() == doctest::Approx(0.0));
}

TEST_CASE("arc trajectory matches a rotation matrix oracle") {
  const Vec2 center(5.0, -3.0);
  const double radius = 12.0, rate = 0.35, start = 0.4;
  const Trajectory t = Trajectory::arc(center, radius, rate, start);

  const double when = 0.1;
  // Oracle: rotate the initial radial vector instead of evaluating the
  // parametric form directly.
  const Vec2 radial0(radius * std::cos(start), radius * std::sin(start));
  const Vec2 expected = center + Eigen::Rotation2Dd(rate * when) * radial0;
  const State2D s = t.state_at(when);
  CHECK((s.position - expected).norm() == doctest::Approx(0.0).epsilon(1e-12));

  // Velocity against a central difference.
  const double h = 1e-6;
  const Vec2 numeric =
      (t.state_at(when + h).position - t.state_at(when - h).position) / (2.0 * h);
  CHECK((s.velocity - numeric).norm() < 1e-5);
  CHECK(s.velocity.norm() == doctest::Approx(radius * rate).epsilon(1e-12));
}

TEST_CASE("trajectories are continuous") {
  RngStream rng(77);
  for (int iter = 0; iter < 200; ++iter) {
    Trajectory t;
    const int kind = static_cast<int>(rng.uniform_index(3));
    if (kind == 0) {
      t = Trajectory::linear({rng.uniform(-10, 10), rng.uniform(-10, 10)},
                             {rng.uniform(-5, 5), rng.uniform(-5, 5)});
    } else if (kind == 1) {
      std::vector<TrajectoryKeyframe> kfs;
      double tk = 0.0;
      for (int i = 0; i < 4; ++i) {
        kfs.push_back({tk, {rng.uniform(-10, 10), rng.uniform(-10, 10)}});
        tk += rng.uniform(0.5, 2.0);
      }
      t = Trajectory::keyframes(std::move(kfs));
    } else {
      t = Trajectory::arc({rng.uniform(-10, 10), rng.uniform(-10, 10)},
                          rng.uniform(1.0, 15.0), rng.uniform(-1.0, 1.0),
                          rng.uniform(-3.0, 3.0));
    }
    double vmax = 0.0;
    for (int i = 0; i <= 60; ++i)
      vmax = std::max(vmax, t.state_at(i * 0.1).velocity.norm());
    const double eps = 1e-4;
    for (int i = 0; i < 60; ++i) {
      const double at = i * 0.1;
      const double step =
          (t.state_at(at + eps).position - t.state_at(at).position).norm();
      CHECK(step <= vmax * eps + 1e-9);
    }
  }
}

TEST_CASE("heading holds through stationary keyframes") {
  const Trajectory t = Trajectory::keyframes(
      {{0.0, {0.0, 0.0}}, {1.0, {0.0, 2.0}}, {2.0, {0.0, 2.0}}});
  CHECK(t.heading_at(0.5) == doctest::Approx(std::numbers::pi / 2));
  CHECK(t.heading_at(1.5) == doctest::Approx(std::numbers::pi / 2));
  CHECK(t.heading_at(2.0) == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("line of sight blocking") {
  const Vec2 sensor(0.0, 0.0);
  std::vector<WallSegment> walls{
      WallSegment::from_endpoints({5.0, -5.0}, {5.0, 5.0}, sensor)};
  CHECK(line_of_sight_blocked(sensor, {10.0, 0.0}, walls));
  CHECK(!line_of_sight_blocked(sensor, {4.0, 0.0}, walls));

  walls = {WallSegment::from_endpoints({5.0, 1.0}, {5.0, 5.0}, sensor)};
  CHECK(!line_of_sight_blocked(sensor, {10.0, 0.0}, walls));

  // Grazing the wall endpoint counts as blocked.
  walls = {WallSegment::from_endpoints({5.0, 0.0}, {5.0, 5.0}, sensor)};
  CHECK(line_of_sight_blocked(sensor, {10.0, 0.0}, walls));
}

namespace {
// Independent intersection oracle: solve the 2x2 system for the segment
// parameters; valid only away from parallel cases.
bool oracle_intersects(const Vec2& a1, const Vec2& a2, const Vec2& b1,
                       const Vec2& b2, bool& usable) {
  Eigen::Matrix2d m;
  m.col(0) = a2 - a1;
  m.col(1) = b1 - b2;
  if (std::abs(m.determinant()) < 1e-9) {
    usable = false;
    return false;
  }
  usable = true;
  const Eigen::Vector2d tu = m.inverse() * (b1 - a1);
  return tu.x() >= 0.0 && tu.x() <= 1.0 && tu.y() >= 0.0 && tu.y() <= 1.0;
}
}  // namespace

TEST_CASE("segment intersection agrees with a linear solve oracle") {
  RngStream rng(123);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const Vec2 a1(rng.uniform(-10, 10), rng.uniform(-10, 10));
    const Vec2 a2(rng.uniform(-10, 10), rng.uniform(-10, 10));
    const Vec2 b1(rng.uniform(-10, 10), rng.uniform(-10, 10));
    const Vec2 b2(rng.uniform(-10, 10), rng.uniform(-10, 10));
    bool usable = false;
    const bool expected = oracle_intersects(a1, a2, b1, b2, usable);
    if (!usable) continue;
    ++checked;
    CHECK(segments_intersect(a1, a2, b1, b2) == expected);
    // Symmetry in both argument orders.
    CHECK(segments_intersect(b1, b2, a1, a2) == expected);
    CHECK(segments_intersect(a2, a1, b2, b1) == expected);
  }
  CHECK(checked > 1500);
}

TEST_CASE("wall frame invariants") {
  RngStream rng(9);
  for (int i = 0; i < 500; ++i) {
    const Vec2 sensor(rng.uniform(-20, 20), rng.uniform(-20, 20));
    const Vec2 a(rng.uniform(-20, 20), rng.uniform(-20, 20));
    const Vec2 b = a + Vec2(rng.uniform(-15, 15), rng.uniform(-15, 15));
    if ((b - a).norm() < kMinWallLength) continue;
    WallSegment w;
    try {
      w = WallSegment::from_endpoints(a, b, sensor);
    } catch (const std::invalid_argument&) {
      continue;  // sensor collinear with the wall
    }
    CHECK(w.direction.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.normal.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((rot90_ccw(w.normal) - w.direction).norm() < 1e-12);
    CHECK(((w.p2 - w.p1).normalized() - w.direction).norm() < 1e-12);
    CHECK(w.signed_distance(sensor) < 0.0);
    CHECK(std::abs(w.normal.dot(w.direction)) < 1e-12);
  }
}

TEST_CASE("degenerate walls are rejected") {
  CHECK_THROWS_AS(WallSegment::from_endpoints({0, 0}, {0.5, 0}, {5, 5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(WallSegment::from_endpoints({1, 0}, {3, 0}, {2, 0}),
                  std::invalid_argument);
}

namespace {
Scenario small_scenario() {
  Scenario s;
  s.name = "unit";
  s.rng_seed = 42;
  s.walls.push_back(WallSegment::from_endpoints({10.0, -6.0}, {10.0, 10.0},
                                                s.sensor_pose.position));
  s.walls.push_back(WallSegment::from_endpoints({2.0, 2.0}, {4.5, 2.0},
                                                s.sensor_pose.position));
  HiddenObject o;
  o.id = "ped0";
  o.object_class = ObjectClass::pedestrian;
  o.trajectory = Trajectory::keyframes(
      {{0.0, {6.0, 5.5}}, {2.4, {6.0, 2.6}}, {4.4, {3.8, 1.0}}});
  s.objects.push_back(o);
  s.clutter.push_back({{3.0, -2.0}, 0.5});
  s.noise_power = 1e-8;
  s.frames = {45, 0.1};
  return s;
}
}  // namespace

TEST_CASE("object state lookup") {
  const Scenario s = small_scenario();
  const State2D st = object_state_at(s, "ped0", 1.2);
  CHECK(st.position.x() == doctest::Approx(6.0));
  CHECK(st.position.y() == doctest::Approx(5.5 - 1.2 * (2.9 / 2.4)));
  CHECK_THROWS_AS(object_state_at(s, "nobody", 1.0), std::out_of_range);
  CHECK_THROWS_AS(object_state_at(s, "ped0", 99.0), std::invalid_argument);
  CHECK_THROWS_AS(object_state_at(s, "ped0", -1.0), std::invalid_argument);
}

TEST_CASE("scatterer offsets are deterministic and bounded") {
  Scenario s = small_scenario();
  s.objects[0].object_class = ObjectClass::cyclist;
  s.objects[0].width = 0.6;
  s.objects[0].length = 1.7;
  s.objects[0].num_scatterers = 5;
  const auto a = scatterer_offsets(s, 0);
  const auto b = scatterer_offsets(s, 0);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() == 0.0);
  double lo = 1e9, hi = -1e9;
  for (const auto& p : a) {
    CHECK(std::abs(p.x()) <= 0.5 * s.objects[0].length + 1e-12);
    CHECK(std::abs(p.y()) <= 0.5 * s.objects[0].width + 1e-12);
    lo = std::min(lo, p.x());
    hi = std::max(hi, p.x());
  }
  CHECK(hi - lo >= 0.4 * s.objects[0].length);
}

TEST_CASE("scenario validation") {
  Scenario s = small_scenario();
  auto report = s.validate();
  CHECK(report.ok());
  CHECK(report.warnings.empty());  // ped0 starts occluded by the side wall

  SUBCASE("frame interval shorter than a measurement") {
    s.frames.interval = 0.01;
    CHECK(!s.validate().ok());
  }
  SUBCASE("object too fast") {
    s.objects[0].trajectory = Trajectory::linear({6.0, 5.0}, {16.0, 0.0});
    CHECK(!s.validate().ok());
  }
  SUBCASE("visible at start is only a warning") {
    s.objects[0].trajectory = Trajectory::linear({5.0, -3.0}, {0.5, 0.0});
    const auto r = s.validate();
    CHECK(r.ok());
    CHECK(!r.warnings.empty());
  }
  SUBCASE("duplicate ids rejected") {
    s.objects.push_back(s.objects[0]);
    CHECK(!s.validate().ok());
  }
}

TEST_CASE("scenario json round trip") {
  const Scenario s = small_scenario();
  const Json j = scenario_to_json(s);
  const Scenario r = scenario_from_json(j);
  CHECK(r.name == s.name);
  CHECK(r.rng_seed == s.rng_seed);
  CHECK(r.walls.size() == s.walls.size());
  for (std::size_t i = 0; i < s.walls.size(); ++i) {
    CHECK((r.walls[i].p1 - s.walls[i].p1).norm() == 0.0);
    CHECK((r.walls[i].p2 - s.walls[i].p2).norm() == 0.0);
    CHECK((r.walls[i].normal - s.walls[i].normal).norm() == 0.0);
  }
  REQUIRE(r.objects.size() == 1);
  CHECK(r.objects[0].id == "ped0");
  const State2D a = r.objects[0].trajectory.state_at(1.3);
  const State2D b = s.objects[0].trajectory.state_at(1.3);
  CHECK((a.position - b.position).norm() == 0.0);
  CHECK(r.noise_power == s.noise_power);
  CHECK(r.frames.count == s.frames.count);
  CHECK(scenario_hash(r) == scenario_hash(s));
}

TEST_CASE("malformed scenario text reports the line") {
  const std::string text = "{\n  \"name\": \"x\",\n  \"seed\": oops\n}\n";
  try {
    parse_json_text(text, "bad.json");
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bad.json:3") != std::string::npos);
  }
}

TEST_CASE("missing fields are named") {
  Json j = scenario_to_json(small_scenario());
  j["objects"][0].erase("trajectory");
  try {
    scenario_from_json(j);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("objects[0].trajectory") != std::string::npos);
  }
}
