#pragma once

#include "weldgroove/point_cloud.hpp"

#include <filesystem>
#include <string_view>

namespace weldgroove {

enum class CloudFormat { PcdAscii, PlyAscii };

/// Picks the format from the file extension (.pcd / .ply). Throws ConfigError otherwise.
CloudFormat format_from_path(const std::filesystem::path& path);

/// Reads an ASCII PCD (v0.7) or ASCII PLY file. Normals are populated iff the file
/// carries normal fields. Throws ParseError (with line number) on malformed input
/// and on files with zero points.
PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format);
PointCloud load_cloud(const std::filesystem::path& path);

/// Writes coordinates with 17 significant digits so that loading reproduces them bit for bit.
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format);
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path);

/// One index per line; blank lines and '#' comments are ignored. Result is sorted and unique.
IndexList load_indices(const std::filesystem::path& path);
void save_indices(const IndexList& indices, const std::filesystem::path& path);

/// Shortest text with 17 significant digits that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace weldgroove
