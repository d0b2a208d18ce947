#include <doctest.h>

#include <algorithm>
#include <limits>
#include <set>

#include "sculpt/cluster.hpp"
#include "sculpt/errors.hpp"
#include "sculpt/rng.hpp"

using namespace sculpt;

namespace {

PointCloud random_cloud(int n, Rng& rng, double lo = 0.0, double hi = 0.075) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    c.points.push_back(
        {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)});
  return c;
}

bool cloud_contains(const PointCloud& cloud, const Point3& p) {
  return std::any_of(cloud.points.begin(), cloud.points.end(),
                     [&](const Point3& q) { return q == p; });
}

}  // namespace

TEST_CASE("crop keeps exactly the in-bounds points") {
  Rng rng(1);
  PointCloud cloud = random_cloud(500, rng, -0.05, 0.12);
  WorkspaceBounds bounds({0.0, 0.0, 0.0}, {0.075, 0.075, 0.075});
  PointCloud kept = crop(cloud, bounds);

  std::size_t expected = 0;
  for (const auto& p : cloud.points)
    if (bounds.contains(p)) ++expected;
  CHECK(kept.size() == expected);
  for (const auto& p : kept.points) CHECK(bounds.contains(p));
  // order of survivors is preserved
  std::size_t j = 0;
  for (const auto& p : cloud.points)
    if (bounds.contains(p)) CHECK(kept.points[j++] == p);
}

TEST_CASE("crop throws when nothing survives") {
  PointCloud cloud;
  cloud.points.push_back({-1.0, -1.0, -1.0});
  WorkspaceBounds bounds({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
  CHECK_THROWS_AS(crop(cloud, bounds), NoClayObserved);
}

TEST_CASE("crop boundary points are inside the closed box") {
  PointCloud cloud;
  cloud.points.push_back({0.0, 0.0, 0.0});
  cloud.points.push_back({1.0, 1.0, 1.0});
  WorkspaceBounds bounds({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
  CHECK(crop(cloud, bounds).size() == 2);
}

TEST_CASE("cluster output is a partition at a Lloyd fixed point") {
  Rng rng(7);
  PointCloud cloud = random_cloud(400, rng);
  const int k = 6;
  ClusteredCloud cc = cluster(cloud, k, 99);

  REQUIRE(cc.clusters.size() == k);
  CHECK(cc.total_points() == cloud.size());
  for (const auto& c : cc.clusters) CHECK_FALSE(c.points.empty());
  // every input point appears in exactly one cluster
  for (const auto& p : cloud.points) {
    int hits = 0;
    for (const auto& c : cc.clusters)
      if (cloud_contains(c.points, p)) ++hits;
    CHECK(hits >= 1);
  }
  // cached centroids match the points
  for (const auto& c : cc.clusters) {
    Point3 m = c.points.centroid();
    CHECK(distance(m, c.centroid) < 1e-12);
  }
  // Lloyd fixed point (modulo the empty-cluster rescue): each point is no
  // farther from its own centroid than from any other centroid, up to ties.
  int violations = 0;
  for (const auto& c : cc.clusters)
    for (const auto& p : c.points.points) {
      double own = squared_distance(p, c.centroid);
      for (const auto& o : cc.clusters)
        if (squared_distance(p, o.centroid) < own - 1e-6) ++violations;
    }
  // the convergence tolerance and rescue pass allow a few near-ties
  CHECK(violations <= 5);
}

TEST_CASE("cluster is deterministic in the seed") {
  Rng rng(3);
  PointCloud cloud = random_cloud(200, rng);
  ClusteredCloud a = cluster(cloud, 5, 42);
  ClusteredCloud b = cluster(cloud, 5, 42);
  REQUIRE(a.clusters.size() == b.clusters.size());
  for (std::size_t i = 0; i < a.clusters.size(); ++i) {
    REQUIRE(a.clusters[i].points.size() == b.clusters[i].points.size());
    for (std::size_t j = 0; j < a.clusters[i].points.size(); ++j)
      CHECK(a.clusters[i].points.points[j] == b.clusters[i].points.points[j]);
  }
}

TEST_CASE("cluster input validation") {
  Rng rng(5);
  PointCloud cloud = random_cloud(3, rng);
  CHECK_THROWS_AS(cluster(cloud, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(cluster(cloud, 4, 0), InvalidArgument);
}

TEST_CASE("downsample is a subset with farthest-point spread") {
  Rng rng(11);
  Cluster c = Cluster::from_points(3, random_cloud(300, rng));
  Cluster d = downsample(c, 40, 7);

  CHECK(d.id == 3);
  REQUIRE(d.points.size() == 40);
  for (const auto& p : d.points.points) CHECK(cloud_contains(c.points, p));
  // no duplicate picks
  std::set<std::tuple<double, double, double>> seen;
  for (const auto& p : d.points.points) seen.insert({p.x, p.y, p.z});
  CHECK(seen.size() == 40);
  // deterministic in the seed
  Cluster d2 = downsample(c, 40, 7);
  for (std::size_t i = 0; i < d.points.size(); ++i)
    CHECK(d.points.points[i] == d2.points.points[i]);
}

TEST_CASE("downsample identity and validation") {
  Rng rng(13);
  Cluster c = Cluster::from_points(0, random_cloud(25, rng));
  Cluster same = downsample(c, 25, 1);
  CHECK(same.points.size() == 25);
  for (std::size_t i = 0; i < c.points.size(); ++i)
    CHECK(same.points.points[i] == c.points.points[i]);
  CHECK_THROWS_AS(downsample(c, 26, 1), InvalidArgument);
  CHECK_THROWS_AS(downsample(c, 0, 1), InvalidArgument);
}

TEST_CASE("order_clusters sorts by centroid z then x then y and relabels") {
  auto one_point = [](double x, double y, double z) {
    return Cluster::from_points(99, PointCloud{{{x, y, z}}});
  };
  std::vector<Cluster> cs;
  cs.push_back(one_point(0.5, 0.1, 0.2));
  cs.push_back(one_point(0.1, 0.9, 0.0));
  cs.push_back(one_point(0.1, 0.2, 0.2));
  ClusteredCloud ordered = order_clusters(cs);
  REQUIRE(ordered.clusters.size() == 3);
  CHECK(ordered.clusters[0].centroid.z == 0.0);
  CHECK(ordered.clusters[1].centroid.x == 0.1);
  CHECK(ordered.clusters[2].centroid.x == 0.5);
  for (int i = 0; i < 3; ++i) CHECK(ordered.clusters[i].id == i);
}

TEST_CASE("order_clusters treats near-equal z as a tie band") {
  auto one_point = [](double x, double y, double z) {
    return Cluster::from_points(0, PointCloud{{{x, y, z}}});
  };
  // z differs by less than the tolerance, so x decides
  std::vector<Cluster> cs;
  cs.push_back(one_point(0.9, 0.0, 0.1004));
  cs.push_back(one_point(0.1, 0.0, 0.1));
  ClusteredCloud ordered = order_clusters(cs);
  CHECK(ordered.clusters[0].centroid.x == 0.1);

  // z differs by more than the tolerance: z wins even against a smaller x
  std::vector<Cluster> cs2;
  cs2.push_back(one_point(0.1, 0.0, 0.2));
  cs2.push_back(one_point(0.9, 0.0, 0.1));
  ClusteredCloud ordered2 = order_clusters(cs2);
  CHECK(ordered2.clusters[0].centroid.z == 0.1);
}
