#include "sculpt/cluster.hpp"

#include <algorithm>
#include <limits>

#include "sculpt/errors.hpp"
#include "sculpt/rng.hpp"

namespace sculpt {

PointCloud crop(const PointCloud& cloud, const WorkspaceBounds& bounds) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points)
    if (bounds.contains(p)) out.points.push_back(p);
  if (out.empty()) throw NoClayObserved();
  return out;
}

namespace {

// k-means++ seeding: first center uniform, then proportional to squared
// distance from the nearest chosen center.
std::vector<Point3> seed_centers(const PointCloud& cloud, int k, Rng& rng) {
  std::vector<Point3> centers;
  centers.reserve(k);
  centers.push_back(cloud.points[rng.next_below(cloud.size())]);
  std::vector<double> d2(cloud.size(), std::numeric_limits<double>::max());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(cloud.points[i], centers.back()));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = rng.next_double() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.next_below(cloud.size());
    }
    centers.push_back(cloud.points[pick]);
  }
  return centers;
}

}  // namespace

ClusteredCloud cluster(const PointCloud& cloud, int k, std::uint64_t seed) {
  if (k < 1) throw InvalidArgument("cluster: k must be >= 1");
  if (cloud.size() < static_cast<std::size_t>(k))
    throw InvalidArgument("cluster: fewer points than clusters requested");

  Rng rng = Rng(seed).substream("kmeans");
  std::vector<Point3> centers = seed_centers(cloud, k, rng);
  std::vector<int> assign(cloud.size(), 0);

  for (int iter = 0; iter < kKMeansMaxIters; ++iter) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      double best = std::numeric_limits<double>::max();
      for (int c = 0; c < k; ++c) {
        double d = squared_distance(cloud.points[i], centers[c]);
        if (d < best) {
          best = d;
          assign[i] = c;
        }
      }
    }
    std::vector<Point3> sums(k);
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      sums[assign[i]] = sums[assign[i]] + cloud.points[i];
      ++counts[assign[i]];
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its center
      Point3 next = sums[c] * (1.0 / counts[c]);
      shift = std::max(shift, distance(next, centers[c]));
      centers[c] = next;
    }
    if (shift < kKMeansToleranceM) break;
  }

  // Re-seed any empty cluster with the point farthest from its center so the
  // partition always has exactly k non-empty groups.
  std::vector<int> counts(k, 0);
  for (int a : assign) ++counts[a];
  for (int c = 0; c < k; ++c) {
    while (counts[c] == 0) {
      int donor = static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                                   counts.begin());
      double best = -1.0;
      std::size_t pick = 0;
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (assign[i] != donor) continue;
        double d = squared_distance(cloud.points[i], centers[donor]);
        if (d > best) {
          best = d;
          pick = i;
        }
      }
      assign[pick] = c;
      --counts[donor];
      ++counts[c];
    }
  }

  std::vector<Cluster> out(k);
  for (int c = 0; c < k; ++c) out[c].id = c;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    out[assign[i]].points.points.push_back(cloud.points[i]);
  for (auto& c : out) c.centroid = c.points.centroid();
  return order_clusters(std::move(out));
}

Cluster downsample(const Cluster& c, int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("downsample: n must be >= 1");
  const std::size_t m = c.points.size();
  if (m < static_cast<std::size_t>(n))
    throw InvalidArgument("downsample: cluster smaller than requested size");
  if (m == static_cast<std::size_t>(n)) return c;

  Rng rng = Rng(seed).substream("fps");
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  chosen.push_back(rng.next_below(m));
  std::vector<double> dist(m, std::numeric_limits<double>::max());
  while (static_cast<int>(chosen.size()) < n) {
    const Point3& last = c.points.points[chosen.back()];
    double best = -1.0;
    std::size_t pick = 0;
    for (std::size_t i = 0; i < m; ++i) {
      dist[i] = std::min(dist[i], squared_distance(c.points.points[i], last));
      if (dist[i] > best) {
        best = dist[i];
        pick = i;
      }
    }
    chosen.push_back(pick);
  }

  Cluster out;
  out.id = c.id;
  out.points.points.reserve(n);
  for (std::size_t i : chosen) out.points.points.push_back(c.points.points[i]);
  out.centroid = out.points.centroid();
  return out;
}

ClusteredCloud order_clusters(std::vector<Cluster> clusters) {
  for (auto& c : clusters) c.centroid = c.points.centroid();
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const Cluster& a, const Cluster& b) {
                     double dz = a.centroid.z - b.centroid.z;
                     if (dz < -kOrderingZToleranceM) return true;
                     if (dz > kOrderingZToleranceM) return false;
                     if (a.centroid.x != b.centroid.x)
                       return a.centroid.x < b.centroid.x;
                     return a.centroid.y < b.centroid.y;
                   });
  for (std::size_t i = 0; i < clusters.size(); ++i)
    clusters[i].id = static_cast<int>(i);
  return ClusteredCloud{std::move(clusters)};
}

}  // namespace sculpt
