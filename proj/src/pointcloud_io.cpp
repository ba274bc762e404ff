#include "nlos/pointcloud_io.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nlos/io_util.hpp"

namespace nlos {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kCsvMagic = "# nlos_pointcloud v1";

double parse_double(const std::string& s, const std::string& origin) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::runtime_error(origin + ": bad number '" + s + "'");
  return v;
}

}  // namespace

void save_pointcloud_csv(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ostringstream out;
  out << kCsvMagic << "\n";
  out << "# timestamp " << format_double(cloud.timestamp) << "\n";
  out << "timestamp,azimuth,range,radial_velocity,amplitude\n";
  for (const RadarPoint& p : cloud.points) {
    out << format_double(cloud.timestamp) << ',' << format_double(p.azimuth) << ','
        << format_double(p.range) << ',' << format_double(p.radial_velocity) << ','
        << format_double(p.amplitude) << "\n";
  }
  write_text_file(path, out.str());
}

PointCloud load_pointcloud_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvMagic)
    throw std::runtime_error(path.string() + ": not a point cloud CSV");
  PointCloud cloud;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# timestamp ", 0) == 0) {
      cloud.timestamp = parse_double(line.substr(12), path.string());
      continue;
    }
    if (line[0] == '#') continue;
    if (!have_header) {  // column header row
      have_header = true;
      continue;
    }
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 5)
      throw std::runtime_error(path.string() + ": expected 5 columns, got " +
                               std::to_string(fields.size()));
    RadarPoint p;
    cloud.timestamp = parse_double(fields[0], path.string());
    p.azimuth = parse_double(fields[1], path.string());
    p.range = parse_double(fields[2], path.string());
    p.radial_velocity = parse_double(fields[3], path.string());
    p.amplitude = parse_double(fields[4], path.string());
    p.log_amplitude = p.amplitude > 0.0 ? std::log(p.amplitude) : 0.0;
    cloud.points.push_back(p);
  }
  return cloud;
}

void save_pointcloud_ndjson(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ostringstream out;
  nlohmann::ordered_json header;
  header["format"] = "nlos_pointcloud";
  header["version"] = 1;
  header["timestamp"] = cloud.timestamp;
  header["count"] = cloud.points.size();
  out << header.dump() << "\n";
  for (const RadarPoint& p : cloud.points) {
    nlohmann::ordered_json rec;
    rec["azimuth"] = p.azimuth;
    rec["range"] = p.range;
    rec["radial_velocity"] = p.radial_velocity;
    rec["amplitude"] = p.amplitude;
    rec["log_amplitude"] = p.log_amplitude;
    out << rec.dump() << "\n";
  }
  write_text_file(path, out.str());
}

PointCloud load_pointcloud_ndjson(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path.string() + ": empty point cloud file");
  const auto header = nlohmann::ordered_json::parse(line, nullptr, true);
  if (!header.is_object() || header.value("format", "") != "nlos_pointcloud")
    throw std::runtime_error(path.string() + ": not a point cloud record stream");
  PointCloud cloud;
  cloud.timestamp = header.value("timestamp", 0.0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::ordered_json::parse(line);
    RadarPoint p;
    p.azimuth = rec.at("azimuth").get<double>();
    p.range = rec.at("range").get<double>();
    p.radial_velocity = rec.at("radial_velocity").get<double>();
    p.amplitude = rec.at("amplitude").get<double>();
    p.log_amplitude = rec.value("log_amplitude", 0.0);
    cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace nlos
