#include "nlos/scene_io.hpp"

#include <stdexcept>

#include "nlos/io_util.hpp"

namespace nlos {
namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("scenario field '" + path + "': " + what);
}

const Json& member(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

double num(const Json& j, const std::string& path, const char* key) {
  const Json& v = member(j, path, key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

double num_or(const Json& j, const std::string& path, const char* key, double def) {
  if (!j.is_object() || !j.contains(key)) return def;
  return num(j, path, key);
}

int integer_or(const Json& j, const std::string& path, const char* key, int def) {
  if (!j.is_object() || !j.contains(key)) return def;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

Vec2 vec2(const Json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    fail(path, "expected [x, y]");
  return Vec2(v[0].get<double>(), v[1].get<double>());
}

Vec2 vec2_member(const Json& j, const std::string& path, const char* key) {
  return vec2(member(j, path, key), path + "." + key);
}

Vec2 vec2_or(const Json& j, const std::string& path, const char* key, const Vec2& def) {
  if (!j.is_object() || !j.contains(key)) return def;
  return vec2(j.at(key), path + "." + key);
}

SensorConfig sensor_config_from_json(const Json& j, const std::string& path) {
  SensorConfig c;
  c.carrier_frequency = num_or(j, path, "carrier_frequency", c.carrier_frequency);
  c.bandwidth = num_or(j, path, "bandwidth", c.bandwidth);
  c.ramp_time = num_or(j, path, "ramp_time", c.ramp_time);
  c.chirp_period = num_or(j, path, "chirp_period", c.chirp_period);
  c.num_chirps = integer_or(j, path, "num_chirps", c.num_chirps);
  c.num_samples_per_chirp =
      integer_or(j, path, "num_samples_per_chirp", c.num_samples_per_chirp);
  c.num_rx_antennas = integer_or(j, path, "num_rx_antennas", c.num_rx_antennas);
  c.antenna_spacing = num_or(j, path, "antenna_spacing",
                             0.5 * kSpeedOfLight / c.carrier_frequency);
  c.max_range = num_or(j, path, "max_range", c.max_range);
  c.fov_azimuth = num_or(j, path, "fov_azimuth", c.fov_azimuth);
  c.angle_bins = integer_or(j, path, "angle_bins", c.angle_bins);
  c.derive();
  // Stored resolutions may pin what the primaries are expected to imply.
  c.range_resolution = num_or(j, path, "range_resolution", c.range_resolution);
  c.velocity_resolution = num_or(j, path, "velocity_resolution", c.velocity_resolution);
  c.angle_resolution = num_or(j, path, "angle_resolution", c.angle_resolution);
  return c;
}

Trajectory trajectory_from_json(const Json& j, const std::string& path) {
  const Json& type = member(j, path, "type");
  if (!type.is_string()) fail(path + ".type", "expected a string");
  const std::string kind = type.get<std::string>();
  if (kind == "linear") {
    return Trajectory::linear(vec2_member(j, path, "start"),
                              vec2_or(j, path, "velocity", {0.0, 0.0}));
  }
  if (kind == "keyframes") {
    const Json& arr = member(j, path, "keyframes");
    if (!arr.is_array() || arr.empty()) fail(path + ".keyframes", "expected a non-empty array");
    std::vector<TrajectoryKeyframe> frames;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = path + ".keyframes[" + std::to_string(i) + "]";
      TrajectoryKeyframe kf;
      kf.t = num(arr[i], p, "t");
      kf.position = vec2_member(arr[i], p, "position");
      frames.push_back(kf);
    }
    return Trajectory::keyframes(std::move(frames));
  }
  if (kind == "arc") {
    return Trajectory::arc(vec2_member(j, path, "center"), num(j, path, "radius"),
                           num(j, path, "angular_rate"),
                           num_or(j, path, "start_angle", 0.0));
  }
  fail(path + ".type", "unknown trajectory type '" + kind + "'");
}

Json trajectory_to_json(const Trajectory& t) {
  Json j;
  switch (t.kind()) {
    case Trajectory::Kind::linear:
      j["type"] = "linear";
      j["start"] = {t.linear_start().x(), t.linear_start().y()};
      j["velocity"] = {t.linear_velocity().x(), t.linear_velocity().y()};
      break;
    case Trajectory::Kind::keyframes: {
      j["type"] = "keyframes";
      Json arr = Json::array();
      for (const auto& kf : t.frames()) {
        Json e;
        e["t"] = kf.t;
        e["position"] = {kf.position.x(), kf.position.y()};
        arr.push_back(std::move(e));
      }
      j["keyframes"] = std::move(arr);
      break;
    }
    case Trajectory::Kind::arc:
      j["type"] = "arc";
      j["center"] = {t.arc_center().x(), t.arc_center().y()};
      j["radius"] = t.arc_radius();
      j["angular_rate"] = t.arc_angular_rate();
      j["start_angle"] = t.arc_start_angle();
      break;
  }
  return j;
}

}  // namespace

Scenario scenario_from_json(const Json& j) {
  if (!j.is_object()) throw std::runtime_error("scenario: expected a JSON object");
  Scenario s;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) fail("name", "expected a string");
    s.name = j.at("name").get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) fail("seed", "expected an integer");
    s.rng_seed = j.at("seed").get<std::uint64_t>();
  }

  if (j.contains("sensor")) {
    const Json& sensor = j.at("sensor");
    if (sensor.contains("pose")) {
      const Json& pose = sensor.at("pose");
      s.sensor_pose.position = vec2_or(pose, "sensor.pose", "position", {0.0, 0.0});
      s.sensor_pose.yaw = num_or(pose, "sensor.pose", "yaw", 0.0);
    }
    s.ego_velocity = vec2_or(sensor, "sensor", "velocity", {0.0, 0.0});
    if (sensor.contains("config"))
      s.sensor = sensor_config_from_json(sensor.at("config"), "sensor.config");
  }

  if (j.contains("walls")) {
    const Json& walls = j.at("walls");
    if (!walls.is_array()) fail("walls", "expected an array");
    for (std::size_t i = 0; i < walls.size(); ++i) {
      const std::string p = "walls[" + std::to_string(i) + "]";
      const Vec2 a = vec2_member(walls[i], p, "p1");
      const Vec2 b = vec2_member(walls[i], p, "p2");
      const double refl = num_or(walls[i], p, "reflectivity", 1.0);
      try {
        s.walls.push_back(WallSegment::from_endpoints(a, b, s.sensor_pose.position, refl));
      } catch (const std::invalid_argument& e) {
        fail(p, e.what());
      }
    }
  }

  if (j.contains("objects")) {
    const Json& objs = j.at("objects");
    if (!objs.is_array()) fail("objects", "expected an array");
    for (std::size_t i = 0; i < objs.size(); ++i) {
      const std::string p = "objects[" + std::to_string(i) + "]";
      HiddenObject o;
      const Json& id = member(objs[i], p, "id");
      if (!id.is_string()) fail(p + ".id", "expected a string");
      o.id = id.get<std::string>();
      const Json& cls = member(objs[i], p, "class");
      if (!cls.is_string()) fail(p + ".class", "expected a string");
      try {
        o.object_class = object_class_from_string(cls.get<std::string>());
      } catch (const std::invalid_argument& e) {
        fail(p + ".class", e.what());
      }
      const bool cyclist = o.object_class == ObjectClass::cyclist;
      o.width = num_or(objs[i], p, "width", cyclist ? 0.6 : 0.45);
      o.length = num_or(objs[i], p, "length", cyclist ? 1.7 : 0.45);
      o.rcs = num_or(objs[i], p, "rcs", cyclist ? 1.0 : 0.1);
      o.num_scatterers = integer_or(objs[i], p, "scatterers", cyclist ? 5 : 3);
      o.trajectory = trajectory_from_json(member(objs[i], p, "trajectory"), p + ".trajectory");
      s.objects.push_back(std::move(o));
    }
  }

  if (j.contains("clutter")) {
    const Json& cl = j.at("clutter");
    if (!cl.is_array()) fail("clutter", "expected an array");
    for (std::size_t i = 0; i < cl.size(); ++i) {
      const std::string p = "clutter[" + std::to_string(i) + "]";
      ClutterPoint c;
      c.position = vec2_member(cl[i], p, "position");
      c.rcs = num_or(cl[i], p, "rcs", 1.0);
      s.clutter.push_back(c);
    }
  }

  s.noise_power = num_or(j, "", "noise_power", 0.0);
  if (j.contains("frames")) {
    const Json& f = j.at("frames");
    s.frames.count = integer_or(f, "frames", "count", 1);
    s.frames.interval = num_or(f, "frames", "interval", 0.1);
  }
  return s;
}

Json scenario_to_json(const Scenario& s) {
  Json j;
  j["name"] = s.name;
  j["seed"] = s.rng_seed;

  Json sensor;
  sensor["pose"] = {{"position", {s.sensor_pose.position.x(), s.sensor_pose.position.y()}},
                    {"yaw", s.sensor_pose.yaw}};
  sensor["velocity"] = {s.ego_velocity.x(), s.ego_velocity.y()};
  Json cfg;
  cfg["carrier_frequency"] = s.sensor.carrier_frequency;
  cfg["bandwidth"] = s.sensor.bandwidth;
  cfg["ramp_time"] = s.sensor.ramp_time;
  cfg["chirp_period"] = s.sensor.chirp_period;
  cfg["num_chirps"] = s.sensor.num_chirps;
  cfg["num_samples_per_chirp"] = s.sensor.num_samples_per_chirp;
  cfg["num_rx_antennas"] = s.sensor.num_rx_antennas;
  cfg["antenna_spacing"] = s.sensor.antenna_spacing;
  cfg["max_range"] = s.sensor.max_range;
  cfg["fov_azimuth"] = s.sensor.fov_azimuth;
  cfg["angle_bins"] = s.sensor.angle_bins;
  cfg["range_resolution"] = s.sensor.range_resolution;
  cfg["velocity_resolution"] = s.sensor.velocity_resolution;
  cfg["angle_resolution"] = s.sensor.angle_resolution;
  sensor["config"] = std::move(cfg);
  j["sensor"] = std::move(sensor);

  Json walls = Json::array();
  for (const auto& w : s.walls) {
    walls.push_back({{"p1", {w.p1.x(), w.p1.y()}},
                     {"p2", {w.p2.x(), w.p2.y()}},
                     {"reflectivity", w.reflectivity}});
  }
  j["walls"] = std::move(walls);

  Json objs = Json::array();
  for (const auto& o : s.objects) {
    Json e;
    e["id"] = o.id;
    e["class"] = to_string(o.object_class);
    e["width"] = o.width;
    e["length"] = o.length;
    e["rcs"] = o.rcs;
    e["scatterers"] = o.num_scatterers;
    e["trajectory"] = trajectory_to_json(o.trajectory);
    objs.push_back(std::move(e));
  }
  j["objects"] = std::move(objs);

  Json cl = Json::array();
  for (const auto& c : s.clutter) {
    cl.push_back({{"position", {c.position.x(), c.position.y()}}, {"rcs", c.rcs}});
  }
  j["clutter"] = std::move(cl);

  j["noise_power"] = s.noise_power;
  j["frames"] = {{"count", s.frames.count}, {"interval", s.frames.interval}};
  return j;
}

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(origin + ":" + std::to_string(line_of_offset(text, e.byte)) +
                             ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  return scenario_from_json(parse_json_text(text, path.string()));
}

void save_scenario(const std::filesystem::path& path, const Scenario& scenario) {
  write_text_file(path, scenario_to_json(scenario).dump(2) + "\n");
}

std::uint64_t scenario_hash(const Scenario& scenario) {
  return fnv1a64(scenario_to_json(scenario).dump());
}

}  // namespace nlos
