#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>

#include "nlos/fmcw.hpp"
#include "nlos/paths.hpp"
#include "nlos/rng.hpp"

using namespace nlos;

TEST_CASE("emitted chirp phase at hand-computed instants") {
  SensorConfig cfg;
  cfg.carrier_frequency = 100.0;
  cfg.bandwidth = 100.0;
  cfg.ramp_time = 1.0;
  cfg.chirp_period = 1.0;
  cfg.derive();

  CHECK(emitted_chirp(cfg, 0.0) == doctest::Approx(1.0));
  // cycles(0.5) = 50 + 12.5 -> cos(pi) = -1
  CHECK(emitted_chirp(cfg, 0.5) == doctest::Approx(-1.0).epsilon(1e-9));
  // cycles(0.25) = 25 + 3.125 -> cos(pi/4)
  CHECK(emitted_chirp(cfg, 0.25) ==
        doctest::Approx(std::cos(std::numbers::pi / 4)).epsilon(1e-9));
  CHECK_THROWS_AS(emitted_chirp(cfg, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(emitted_chirp(cfg, 1.1), std::invalid_argument);
}

TEST_CASE("chirp frequency ramps to carrier plus bandwidth") {
  SensorConfig cfg;
  cfg.carrier_frequency = 100.0;
  cfg.bandwidth = 100.0;
  cfg.ramp_time = 1.0;
  cfg.chirp_period = 1.0;
  cfg.derive();

  // Count zero crossings over the last tenth of the ramp. The instantaneous
  // frequency there is close to f_c + B = 200 Hz, so the cycle count over
  // [0.9, 1.0] should be ~19.5 and the crossing count ~39.
  int crossings = 0;
  double prev = emitted_chirp(cfg, 0.9);
  const int steps = 20000;
  for (int i = 1; i <= steps; ++i) {
    const double t = 0.9 + 0.1 * i / steps;
    const double v = emitted_chirp(cfg, t);
    if ((prev < 0.0) != (v < 0.0)) ++crossings;
    prev = v;
  }
  CHECK(crossings >= 38);
  CHECK(crossings <= 40);
}

namespace {
Scenario point_scene(const Vec2& position, const Vec2& velocity) {
  Scenario s;
  s.rng_seed = 7;
  s.walls.push_back(WallSegment::from_endpoints({5.0, -5.0}, {5.0, 5.0},
                                                s.sensor_pose.position));
  HiddenObject o;
  o.id = "pt";
  o.width = 1e-6;
  o.length = 1e-6;
  o.num_scatterers = 1;
  o.rcs = 1.0;
  o.trajectory = Trajectory::linear(position, velocity);
  s.objects.push_back(o);
  s.frames = {2, 0.1};
  return s;
}
}  // namespace

TEST_CASE("mirror path for a point in front of a flat wall") {
  const Scenario s = point_scene({1.0, 0.0}, {0.0, 1.0});
  const auto paths = enumerate_paths(s, 0.0);
  REQUIRE(paths.size() == 2);  // direct and one bounce

  const auto& direct = paths[0];
  CHECK(direct.kind == PathKind::direct);
  CHECK(direct.path_length == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(direct.radial_velocity == doctest::Approx(0.0).epsilon(1e-5));

  const auto& bounce = paths[1];
  CHECK(bounce.kind == PathKind::third_bounce);
  CHECK(bounce.apparent_position.x() == doctest::Approx(9.0).epsilon(1e-5));
  CHECK(bounce.apparent_position.y() == doctest::Approx(0.0).epsilon(1e-4));
  CHECK(bounce.wall_point.x() == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(bounce.wall_point.y() == doctest::Approx(0.0).epsilon(1e-4));
  CHECK(bounce.path_length == doctest::Approx(18.0).epsilon(1e-5));
  // Motion parallel to the wall, virtual point dead ahead: zero closing rate.
  CHECK(bounce.radial_velocity == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("occluded object keeps only the bounce path") {
  Scenario s;
  s.rng_seed = 11;
  s.walls.push_back(WallSegment::from_endpoints({10.0, -6.0}, {10.0, 10.0},
                                                s.sensor_pose.position));
  s.walls.push_back(WallSegment::from_endpoints({2.0, 2.0}, {4.5, 2.0},
                                                s.sensor_pose.position));
  HiddenObject o;
  o.id = "ped";
  o.width = 1e-6;
  o.length = 1e-6;
  o.num_scatterers = 1;
  o.trajectory = Trajectory::linear({6.0, 5.5}, {0.0, -1.2});
  s.objects.push_back(o);
  s.frames = {2, 0.1};

  const auto paths = enumerate_paths(s, 0.0);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].kind == PathKind::third_bounce);
  CHECK(paths[0].wall_index == 0);
  CHECK(paths[0].apparent_position.x() == doctest::Approx(14.0).epsilon(1e-4));
  CHECK(paths[0].apparent_position.y() == doctest::Approx(5.5).epsilon(1e-4));
  CHECK(paths[0].wall_point.y() == doctest::Approx(10.0 * 5.5 / 14.0).epsilon(1e-4));
}

TEST_CASE("bounce geometry invariants on random scenes") {
  RngStream rng(2024);
  int bounces = 0;
  for (int iter = 0; iter < 800; ++iter) {
    Scenario s;
    s.rng_seed = iter;
    const Vec2 a(rng.uniform(4.0, 20.0), rng.uniform(-15.0, 15.0));
    const Vec2 b = a + rotate({rng.uniform(2.0, 18.0), 0.0}, rng.uniform(0.0, 6.28));
    try {
      s.walls.push_back(WallSegment::from_endpoints(a, b, s.sensor_pose.position));
    } catch (const std::invalid_argument&) {
      continue;
    }
    HiddenObject o;
    o.id = "pt";
    o.width = 1e-6;
    o.length = 1e-6;
    o.num_scatterers = 1;
    o.trajectory = Trajectory::linear(
        {rng.uniform(-2.0, 14.0), rng.uniform(-12.0, 12.0)},
        {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
    s.objects.push_back(o);
    s.frames = {2, 0.1};

    for (const auto& p : enumerate_paths(s, 0.0)) {
      const Vec2 c = s.sensor_pose.position;
      if (p.kind == PathKind::direct) {
        CHECK(!line_of_sight_blocked(c, p.source_position, s.walls));
        continue;
      }
      ++bounces;
      const auto& wall = s.walls[p.wall_index];
      // Specular point strictly interior to the wall segment.
      const double along = wall.direction.dot(p.wall_point - wall.p1);
      CHECK(along > 0.0);
      CHECK(along < wall.length());
      CHECK(std::abs(wall.signed_distance(p.wall_point)) < 1e-9);
      // Apparent position is the mirror image of the source.
      CHECK((p.apparent_position - mirror_across_wall(p.source_position, wall)).norm() <
            1e-9);
      // Path length equals the legs and twice the virtual range.
      const double leg1 = (p.wall_point - c).norm();
      const double leg2 = (p.source_position - p.wall_point).norm();
      CHECK(p.path_length == doctest::Approx(2.0 * leg1 + 2.0 * leg2).epsilon(1e-12));
      CHECK(p.path_length ==
            doctest::Approx(2.0 * (p.apparent_position - c).norm()).epsilon(1e-9));
      // Reflection law at the wall point.
      const Vec2 d_in = (p.wall_point - c).normalized();
      const Vec2 d_out = (p.source_position - p.wall_point).normalized();
      CHECK((reflect_direction(d_in, wall.normal) - d_out).norm() < 1e-9);
    }
  }
  CHECK(bounces > 100);
}

TEST_CASE("bounce amplitude falls off as the fourth power") {
  const double a1 = three_bounce_amplitude(1.0, 1.0, 5.0, 4.0, 5.0);
  const double a2 = three_bounce_amplitude(1.0, 1.0, 10.0, 8.0, 10.0);
  CHECK(a1 / a2 == doctest::Approx(16.0).epsilon(1e-12));
  // Monostatic identity: amplitude = rcs / r_virtual^4.
  CHECK(a1 == doctest::Approx(1.0 / std::pow(9.0, 4)).epsilon(1e-12));
  // Wall reflectivity enters once per wall interaction.
  CHECK(three_bounce_amplitude(1.0, 0.5, 5.0, 4.0, 5.0) ==
        doctest::Approx(0.25 * a1).epsilon(1e-12));
}

namespace {
Scenario synth_scene() {
  Scenario s;
  s.rng_seed = 99;
  s.sensor.num_rx_antennas = 4;
  s.sensor.num_chirps = 8;
  s.sensor.num_samples_per_chirp = 256;
  s.sensor.ramp_time = 2.0e-5;
  s.sensor.derive();
  s.frames = {2, 0.1};
  return s;
}

PropagationPath tone_path(double range, double v_r, double azimuth, double amplitude) {
  PropagationPath p;
  p.kind = PathKind::direct;
  p.path_length = 2.0 * range;
  p.radial_velocity = v_r;
  p.azimuth = azimuth;
  p.amplitude = amplitude;
  return p;
}

// Naive DFT magnitude argmax; deliberately independent of the processing
// module.
int dft_argmax(const std::vector<std::complex<double>>& x) {
  int best = 0;
  double best_mag = -1.0;
  const int n = static_cast<int>(x.size());
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      const double ph = -2.0 * std::numbers::pi * k * i / n;
      acc += x[i] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    if (std::norm(acc) > best_mag) {
      best_mag = std::norm(acc);
      best = k;
    }
  }
  return best;
}
}  // namespace

TEST_CASE("synthesized beat frequency lands on the range bin") {
  const Scenario s = synth_scene();
  const auto frame = synthesize_frame(s, 0, {tone_path(30.0, 0.0, 0.0, 1.0)}, false);

  std::vector<std::complex<double>> row(frame.num_samples);
  for (int i = 0; i < frame.num_samples; ++i) row[i] = frame.at(0, 0, i);
  // f_beat * T_ramp = B * 2r / c = 200.1 cycles across the ramp.
  CHECK(dft_argmax(row) == 200);
  // Expected beat frequency 1e7 Hz for these parameters.
  const double f_beat = s.sensor.bandwidth / s.sensor.ramp_time * (60.0 / kSpeedOfLight);
  CHECK(f_beat == doctest::Approx(1.0007e7).epsilon(1e-3));
}

TEST_CASE("doppler phase steps by pi at the edge velocity") {
  const Scenario s = synth_scene();
  const double v_amb = s.sensor.max_unambiguous_velocity();  // lambda / (4 T)
  const auto frame = synthesize_frame(s, 0, {tone_path(20.0, v_amb, 0.0, 1.0)}, false);
  for (int i = 0; i < 16; ++i) {
    const auto a = frame.at(0, 0, i);
    const auto b = frame.at(0, 1, i);
    CHECK(std::abs(b + a) < 1e-9 * std::abs(a) + 1e-15);
  }
}

TEST_CASE("array phase advances by pi/2 at 30 degrees") {
  const Scenario s = synth_scene();
  const auto frame = synthesize_frame(
      s, 0, {tone_path(20.0, 0.0, std::numbers::pi / 6, 1.0)}, false);
  const std::complex<double> j(0.0, 1.0);
  for (int i = 0; i < 16; ++i) {
    const auto a = frame.at(0, 0, i);
    const auto b = frame.at(1, 0, i);
    CHECK(std::abs(b - j * a) < 1e-9 * std::abs(a) + 1e-15);
  }
}

TEST_CASE("synthesis is linear in the path set") {
  const Scenario s = synth_scene();
  const auto pa = tone_path(25.0, 1.0, 0.3, 2.0);
  const auto pb = tone_path(60.0, -0.7, -0.4, 0.5);
  const auto fa = synthesize_frame(s, 0, {pa}, false);
  const auto fb = synthesize_frame(s, 0, {pb}, false);
  const auto fab = synthesize_frame(s, 0, {pa, pb}, false);
  double scale = 0.0;
  for (const auto& v : fab.data) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < fab.data.size(); ++i) {
    CHECK(std::abs(fab.data[i] - (fa.data[i] + fb.data[i])) <= 1e-9 * scale);
  }
}

TEST_CASE("empty path set synthesizes silence") {
  Scenario s = synth_scene();
  s.noise_power = 0.0;
  const auto frame = synthesize_frame(s, 0, {}, true);
  for (const auto& v : frame.data) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("noise is deterministic per frame and differs across frames") {
  Scenario s = synth_scene();
  s.noise_power = 1e-6;
  const auto f1 = synthesize_frame(s, 0, {}, true);
  const auto f2 = synthesize_frame(s, 0, {}, true);
  REQUIRE(f1.data.size() == f2.data.size());
  CHECK(std::memcmp(f1.data.data(), f2.data.data(),
                    f1.data.size() * sizeof(std::complex<double>)) == 0);
  const auto f3 = synthesize_frame(s, 1, {}, true);
  CHECK(std::memcmp(f1.data.data(), f3.data.data(),
                    f1.data.size() * sizeof(std::complex<double>)) != 0);
}

TEST_CASE("raw frame dump round trip") {
  Scenario s = synth_scene();
  s.noise_power = 1e-6;
  std::vector<RawFrame> frames{synthesize_frame(s, 0), synthesize_frame(s, 1)};
  const auto dir = std::filesystem::temp_directory_path() / "nlos_test_raw";
  std::filesystem::create_directories(dir);
  const auto file = dir / "frames.bin";
  dump_raw_frames(file, frames, 0xabcdef12u);

  const RawDump dump = load_raw_frames(file);
  CHECK(dump.config_hash == 0xabcdef12u);
  REQUIRE(dump.frames.size() == 2);
  CHECK(dump.frames[0].num_antennas == frames[0].num_antennas);
  CHECK(dump.frames[1].timestamp == doctest::Approx(0.1));
  double scale = 0.0;
  for (const auto& v : frames[0].data) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < frames[0].data.size(); ++i) {
    CHECK(std::abs(dump.frames[0].data[i] - frames[0].data[i]) <= 1e-6 * scale);
  }
  std::filesystem::remove_all(dir);
}
