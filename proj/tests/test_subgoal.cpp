#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "sculpt/errors.hpp"
#include "sculpt/rng.hpp"
#include "sculpt/subgoal.hpp"

using namespace sculpt;

namespace {

Cluster random_cluster(int id, int n, Rng& rng) {
  PointCloud pts;
  for (int i = 0; i < n; ++i)
    pts.points.push_back({rng.uniform(0.01, 0.06), rng.uniform(0.01, 0.06),
                          rng.uniform(0.0, 0.05)});
  return Cluster::from_points(id, std::move(pts));
}

double max_point_gap(const Cluster& a, const Cluster& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    worst = std::max(worst, distance(a.points.points[i], b.points.points[i]));
  return worst;
}

}  // namespace

TEST_CASE("all modifications are the exact identity at w = 0") {
  Rng rng(1);
  Cluster c = random_cluster(0, 80, rng);
  for (const Cluster& out :
       {lengthen(c, {0, 0, 1}, 0.0), shorten(c, {1, 0, 0}, 0.0),
        flatten(c, 0.0), thin(c, {0, 1, 0}, 0.0)}) {
    REQUIRE(out.points.size() == c.points.size());
    for (std::size_t i = 0; i < c.points.size(); ++i)
      CHECK(out.points.points[i] == c.points.points[i]);
  }
}

TEST_CASE("flatten at w = 1 lands every point exactly on the cluster floor") {
  Rng rng(2);
  Cluster c = random_cluster(0, 60, rng);
  double floor = c.points.min_z();
  Cluster flat = flatten(c, 1.0);
  for (const auto& p : flat.points.points) CHECK(p.z == floor);
  // x and y are untouched
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    CHECK(flat.points.points[i].x == c.points.points[i].x);
    CHECK(flat.points.points[i].y == c.points.points[i].y);
  }
}

TEST_CASE("lengthen then matched shorten recovers the cluster to 1e-9") {
  Rng rng(3);
  Cluster c = random_cluster(0, 100, rng);
  Point3 d{0.0, 0.0, 1.0};
  for (double w : {0.1, 0.4, 0.8, 1.0}) {
    // (1 + w*kappa)(1 - w'*kappa') = 1  =>  w' = w*kappa / (kappa' * (1 + w*kappa))
    double wp = w * kGainStretch / (kGainCompress * (1.0 + w * kGainStretch));
    REQUIRE(wp <= 1.0);
    Cluster roundtrip = shorten(lengthen(c, d, w), d, wp);
    CHECK(max_point_gap(c, roundtrip) < 1e-9);
  }
}

TEST_CASE("extent along the axis is monotone in the weight") {
  Rng rng(4);
  Cluster c = random_cluster(0, 100, rng);
  const Point3 d{1.0, 0.0, 0.0};
  const Point3 z{0.0, 0.0, 1.0};
  double prev_len = -1.0, prev_short = 1e9, prev_flat = 1e9, prev_thin = 1e9;
  for (double w : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    double len = lengthen(c, d, w).points.extent_along(d);
    double sho = shorten(c, d, w).points.extent_along(d);
    double fla = flatten(c, w).points.extent_along(z);
    // thin compresses perpendicular to the given horizontal direction
    double thi = thin(c, {0.0, 1.0, 0.0}, w).points.extent_along({-1.0, 0.0, 0.0});
    if (w > 0.0) {
      CHECK(len > prev_len);
      CHECK(sho < prev_short);
      CHECK(fla < prev_flat);
      CHECK(thi < prev_thin);
    }
    prev_len = len;
    prev_short = sho;
    prev_flat = fla;
    prev_thin = thi;
  }
  // shorten never collapses past zero
  CHECK(shorten(c, d, 1.0).points.extent_along(d) > 0.0);
}

TEST_CASE("modification input validation") {
  Rng rng(5);
  Cluster c = random_cluster(0, 10, rng);
  Cluster empty;
  CHECK_THROWS_AS(lengthen(empty, {0, 0, 1}, 0.5), InvalidArgument);
  CHECK_THROWS_AS(lengthen(c, {0, 0, 1}, 1.5), InvalidArgument);
  CHECK_THROWS_AS(lengthen(c, {0, 0, 1}, -0.1), InvalidArgument);
  CHECK_THROWS_AS(lengthen(c, {0, 0, 2}, 0.5), InvalidArgument);
  CHECK_THROWS_AS(thin(c, {0, 0, 1}, 0.5), InvalidArgument);  // not horizontal
  CHECK_THROWS_AS(flatten(c, 2.0), InvalidArgument);
}

TEST_CASE("apply_modification dispatches on kind") {
  Rng rng(6);
  Cluster c = random_cluster(2, 50, rng);
  Modification m{ModKind::Lengthen, 2, {0.0, 0.0, 1.0}, 0.5};
  Cluster via = apply_modification(c, m);
  Cluster direct = lengthen(c, m.direction, m.weight);
  CHECK(max_point_gap(via, direct) == 0.0);
  CHECK(to_string(ModKind::Thin) == "thin");
  CHECK(mod_kind_from_string("flatten") == ModKind::Flatten);
  CHECK_FALSE(mod_kind_from_string("bend").has_value());
}

TEST_CASE("serialize_for_llm emits ordered per-point lines") {
  Rng rng(7);
  ClusteredCloud cloud;
  cloud.clusters.push_back(random_cluster(0, 60, rng));
  cloud.clusters.push_back(random_cluster(1, 60, rng));
  std::string text = serialize_for_llm(cloud, 0);

  std::istringstream lines(text);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    CHECK(line.rfind("cluster ", 0) == 0);
    CHECK(line.find(": point at (") != std::string::npos);
    ++count;
  }
  // each cluster capped at the LLM point budget
  CHECK(count == 2 * kLlmPointsPerCluster);
  // deterministic in the seed
  CHECK(serialize_for_llm(cloud, 0) == text);
}

TEST_CASE("heuristic backend proposes an improving modification") {
  // a column built too short: lengthening along z should win
  Rng rng(8);
  PointCloud pts;
  for (int i = 0; i < 200; ++i) {
    double a = rng.uniform(0.0, 2.0 * M_PI);
    double r = 0.006 * std::sqrt(rng.next_double());
    pts.points.push_back({0.0375 + r * std::cos(a), 0.0375 + r * std::sin(a),
                          rng.uniform(0.0, 0.030)});
  }
  ClusteredCloud cloud;
  cloud.clusters.push_back(Cluster::from_points(0, std::move(pts)));

  auto backend = heuristic_subgoal_backend(0);
  std::string audit;
  auto m = backend(cloud, ShapePrompt{"column"}, &audit);
  REQUIRE(m.has_value());

  auto j = nlohmann::json::parse(audit);
  CHECK(j["backend"] == "heuristic");
  CHECK(j["best_residual"].get<double>() < j["baseline_residual"].get<double>());
  CHECK(j.contains("kind"));
  CHECK(j["cluster"] == m->cluster_id);

  // the proposal must actually reduce the residual it reports
  CHECK(m->weight >= 0.0);
  CHECK(m->weight <= 1.0);
}

TEST_CASE("propose_subgoal applies the chosen modification") {
  Rng rng(9);
  ClusteredCloud cloud;
  cloud.clusters.push_back(random_cluster(0, 40, rng));
  SubGoalBackend fixed = [](const ClusteredCloud&, const ShapePrompt&,
                            std::string*) -> std::optional<Modification> {
    return Modification{ModKind::Flatten, 0, {0, 0, 1}, 0.5};
  };
  auto sg = propose_subgoal(cloud, ShapePrompt{"line"}, fixed);
  REQUIRE(sg.has_value());
  Cluster expect = flatten(cloud.clusters[0], 0.5);
  CHECK(max_point_gap(sg->target_cluster, expect) == 0.0);

  SubGoalBackend declines = [](const ClusteredCloud&, const ShapePrompt&,
                               std::string*) -> std::optional<Modification> {
    return std::nullopt;
  };
  CHECK_FALSE(propose_subgoal(cloud, ShapePrompt{"line"}, declines).has_value());

  ClusteredCloud empty;
  CHECK_THROWS_AS(propose_subgoal(empty, ShapePrompt{"line"}, fixed),
                  InvalidArgument);
}
