#pragma once

#include <cstdint>
#include <vector>

#include "sculpt/geometry.hpp"

namespace sculpt {

struct Cluster {
  int id = 0;
  PointCloud points;
  Point3 centroid;  // cached arithmetic mean of points

  static Cluster from_points(int id, PointCloud pts) {
    Cluster c;
    c.id = id;
    c.centroid = pts.centroid();
    c.points = std::move(pts);
    return c;
  }
};

struct ClusteredCloud {
  std::vector<Cluster> clusters;

  std::size_t total_points() const {
    std::size_t n = 0;
    for (const auto& c : clusters) n += c.points.size();
    return n;
  }
};

// z-equality tolerance when ordering clusters by centroid; ties within this
// band fall through to the (x, y) comparison.
inline constexpr double kOrderingZToleranceM = 1e-3;

// k-means defaults for the regional-patch segmentation.
inline constexpr int kKMeansMaxIters = 100;
inline constexpr double kKMeansToleranceM = 1e-6;
inline constexpr int kDefaultClusterCount = 10;
inline constexpr int kClusterPointCount = 256;
inline constexpr int kLlmPointsPerCluster = 50;

// Keeps exactly the points inside the closed box. Throws NoClayObserved when
// nothing survives the crop.
PointCloud crop(const PointCloud& cloud, const WorkspaceBounds& bounds);

// Partitions the cloud into k regional patches with seeded k-means
// (k-means++ initialization, Lloyd iterations to convergence), then orders
// clusters by centroid (z, x, y) and relabels ids 0..k-1.
ClusteredCloud cluster(const PointCloud& cloud, int k, std::uint64_t seed);

// Farthest-point sampling down to n points; the result is a subset of the
// input, seeded start point.
Cluster downsample(const Cluster& c, int n, std::uint64_t seed);

// Stable sort by centroid (z, x, y) with the z tolerance band; ids are
// relabeled in sorted order.
ClusteredCloud order_clusters(std::vector<Cluster> clusters);

}  // namespace sculpt
