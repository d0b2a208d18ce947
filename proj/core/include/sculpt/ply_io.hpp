#pragma once

#include <filesystem>
#include <string>

#include "sculpt/cluster.hpp"
#include "sculpt/geometry.hpp"

namespace sculpt {

// ASCII PLY, element vertex with float x,y,z properties.
void write_ply(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_ply(const std::filesystem::path& path);

// JSON form: {"clusters":[{"id":..,"centroid":[x,y,z],"points":[[x,y,z],...]}]}
std::string clustered_cloud_to_json(const ClusteredCloud& cloud);
ClusteredCloud clustered_cloud_from_json(const std::string& text);

}  // namespace sculpt
