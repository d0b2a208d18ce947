#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sculpt {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Point3 operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Point3& o) const = default;

  double dot(const Point3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  double squared_norm() const { return dot(*this); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline double distance(const Point3& a, const Point3& b) { return (a - b).norm(); }
inline double squared_distance(const Point3& a, const Point3& b) {
  return (a - b).squared_norm();
}

struct PointCloud {
  std::vector<Point3> points;

  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> pts) : points(std::move(pts)) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  Point3 centroid() const {
    if (points.empty()) throw std::invalid_argument("centroid of empty cloud");
    Point3 c;
    for (const auto& p : points) c = c + p;
    return c * (1.0 / static_cast<double>(points.size()));
  }

  double min_z() const {
    if (points.empty()) throw std::invalid_argument("min_z of empty cloud");
    double m = points.front().z;
    for (const auto& p : points) m = std::min(m, p.z);
    return m;
  }

  // Extent of the cloud projected on a direction (max - min of p.dot(d)).
  double extent_along(const Point3& d) const {
    if (points.empty()) return 0.0;
    double lo = points.front().dot(d), hi = lo;
    for (const auto& p : points) {
      double v = p.dot(d);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi - lo;
  }
};

struct WorkspaceBounds {
  Point3 min;
  Point3 max;

  WorkspaceBounds(Point3 lo, Point3 hi) : min(lo), max(hi) {
    if (!(min.x < max.x && min.y < max.y && min.z < max.z))
      throw std::invalid_argument("WorkspaceBounds: min must be < max componentwise");
  }

  bool contains(const Point3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
           p.z >= min.z && p.z <= max.z;
  }
};

}  // namespace sculpt
