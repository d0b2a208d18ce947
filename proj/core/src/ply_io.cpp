#include "sculpt/ply_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sculpt/errors.hpp"

namespace sculpt {

void write_ply(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidState("write_ply: cannot open " + path.string());
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "end_header\n";
  out.precision(9);
  for (const auto& p : cloud.points) out << p.x << " " << p.y << " " << p.z << "\n";
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidState("read_ply: cannot open " + path.string());
  std::string line;
  std::size_t count = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (line.rfind("element vertex", 0) == 0) {
      std::istringstream ss(line.substr(14));
      ss >> count;
    } else if (line.rfind("end_header", 0) == 0) {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw InvalidState("read_ply: malformed header in " + path.string());
  PointCloud cloud;
  cloud.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Point3 p;
    if (!(in >> p.x >> p.y >> p.z))
      throw InvalidState("read_ply: truncated vertex data in " + path.string());
    cloud.points.push_back(p);
  }
  return cloud;
}

std::string clustered_cloud_to_json(const ClusteredCloud& cloud) {
  nlohmann::ordered_json j;
  j["clusters"] = nlohmann::ordered_json::array();
  for (const auto& c : cloud.clusters) {
    nlohmann::ordered_json jc;
    jc["id"] = c.id;
    jc["centroid"] = {c.centroid.x, c.centroid.y, c.centroid.z};
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : c.points.points) pts.push_back({p.x, p.y, p.z});
    jc["points"] = std::move(pts);
    j["clusters"].push_back(std::move(jc));
  }
  return j.dump();
}

ClusteredCloud clustered_cloud_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  ClusteredCloud out;
  for (const auto& jc : j.at("clusters")) {
    Cluster c;
    c.id = jc.at("id").get<int>();
    const auto& ctr = jc.at("centroid");
    c.centroid = {ctr.at(0).get<double>(), ctr.at(1).get<double>(),
                  ctr.at(2).get<double>()};
    for (const auto& jp : jc.at("points"))
      c.points.points.push_back(
          {jp.at(0).get<double>(), jp.at(1).get<double>(), jp.at(2).get<double>()});
    out.clusters.push_back(std::move(c));
  }
  return out;
}

}  // namespace sculpt
