#pragma once

#include <filesystem>

#include "nlos/dsp.hpp"

namespace nlos {

/// CSV with a version header; one row per point, timestamp repeated per row.
/// Numbers are written shortest-exact, so values round trip bit for bit.
void save_pointcloud_csv(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud load_pointcloud_csv(const std::filesystem::path& path);

/// Same data as newline-delimited JSON records: one header record, then one
/// record per point.
void save_pointcloud_ndjson(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud load_pointcloud_ndjson(const std::filesystem::path& path);

/// Shortest representation of a double that parses back to the same value.
std::string format_double(double v);

}  // namespace nlos
