#include <doctest.h>

#include <cmath>

#include "sculpt/errors.hpp"
#include "sculpt/occupancy.hpp"
#include "sculpt/sim.hpp"

using namespace sculpt;

namespace {

ChunkPlacement placement_at(const OccupancyGrid& grid, const CellIndex& cell) {
  return {cell, grid.cell_center(cell)};
}

}  // namespace

TEST_CASE("place_chunk samples n_chunk particles inside the ball") {
  OccupancyGrid grid;
  SimConfig cfg;
  ClayBody body = place_chunk({}, grid, placement_at(grid, {2, 2, 0}), cfg, 1);

  REQUIRE(static_cast<int>(body.particles.size()) == cfg.n_chunk);
  const Point3 cc = grid.cell_center({2, 2, 0});
  const double center_z = cfg.floor_z + cfg.r_chunk;  // resting on the floor
  for (const auto& p : body.particles.points) {
    Point3 d = p - Point3{cc.x, cc.y, center_z};
    CHECK(d.norm() <= cfg.r_chunk + 1e-12);
  }
  REQUIRE(body.placed_cells.size() == 1);
  CHECK(body.placed_cells[0] == CellIndex{2, 2, 0});
  const double ball_volume =
      4.0 / 3.0 * M_PI * cfg.r_chunk * cfg.r_chunk * cfg.r_chunk;
  CHECK(body.particle_volume ==
        doctest::Approx(ball_volume / cfg.n_chunk).epsilon(1e-12));
}

TEST_CASE("place_chunk rest height stacks on the column below") {
  OccupancyGrid grid;
  SimConfig cfg;
  ClayBody body = place_chunk({}, grid, placement_at(grid, {2, 2, 0}), cfg, 1);

  // oracle: top of the supporting particles inside the xy footprint
  const Point3 cc = grid.cell_center({2, 2, 1});
  double top = cfg.floor_z;
  for (const auto& p : body.particles.points) {
    double dx = p.x - cc.x, dy = p.y - cc.y;
    if (dx * dx + dy * dy <= cfg.r_chunk * cfg.r_chunk && p.z > top) top = p.z;
  }
  const double expect_z = top + cfg.r_chunk - cfg.delta_merge;

  ClayBody stacked = place_chunk(body, grid, placement_at(grid, {2, 2, 1}), cfg, 2);
  // the new ball's particles are centered on expect_z
  double lo = 1e9, hi = -1e9;
  for (std::size_t i = body.particles.size(); i < stacked.particles.size(); ++i) {
    double z = stacked.particles.points[i].z;
    lo = std::min(lo, z);
    hi = std::max(hi, z);
  }
  CHECK(lo >= expect_z - cfg.r_chunk - 1e-12);
  CHECK(hi <= expect_z + cfg.r_chunk + 1e-12);
  CHECK(hi - expect_z <= cfg.r_chunk);
  CHECK(expect_z - lo <= cfg.r_chunk);
}

TEST_CASE("place_chunk rejects bad cells") {
  OccupancyGrid grid;
  SimConfig cfg;
  ClayBody body = place_chunk({}, grid, placement_at(grid, {0, 0, 0}), cfg, 1);
  CHECK_THROWS_AS(
      place_chunk(body, grid, {{5, 0, 0}, {0, 0, 0}}, cfg, 1), InvalidArgument);
  CHECK_THROWS_AS(
      place_chunk(body, grid, {{-1, 0, 0}, {0, 0, 0}}, cfg, 1), InvalidArgument);
  CHECK_THROWS_AS(place_chunk(body, grid, placement_at(grid, {0, 0, 0}), cfg, 2),
                  InvalidArgument);
}

TEST_CASE("place_chunk is deterministic in the seed") {
  OccupancyGrid grid;
  SimConfig cfg;
  ClayBody a = place_chunk({}, grid, placement_at(grid, {1, 1, 0}), cfg, 77);
  ClayBody b = place_chunk({}, grid, placement_at(grid, {1, 1, 0}), cfg, 77);
  for (std::size_t i = 0; i < a.particles.size(); ++i)
    CHECK(a.particles.points[i] == b.particles.points[i]);
}

TEST_CASE("apply_grasp preserves particle count and squeezes the band") {
  OccupancyGrid grid;
  SimConfig cfg;
  ClayBody body = place_chunk({}, grid, placement_at(grid, {2, 2, 0}), cfg, 3);

  const Point3 cc = grid.cell_center({2, 2, 0});
  GraspAction a{cc.x, cc.y, cfg.r_chunk, 0.3, 0.008};
  ClayBody out = apply_grasp(body, a, cfg);
  REQUIRE(out.particles.size() == body.particles.size());

  const Point3 c{a.x, a.y, a.z};
  const Point3 u{std::cos(a.rot_z), std::sin(a.rot_z), 0.0};
  const Point3 n{-std::sin(a.rot_z), std::cos(a.rot_z), 0.0};
  int moved = 0;
  for (std::size_t i = 0; i < out.particles.size(); ++i) {
    const Point3& before = body.particles.points[i];
    const Point3& after = out.particles.points[i];
    Point3 db = before - c;
    bool in_band = std::fabs(db.dot(n)) <= cfg.finger_width / 2.0 &&
                   std::fabs(db.z) <= cfg.finger_height / 2.0;
    if (!in_band) {
      CHECK(after == before);  // untouched outside the finger sweep
    } else {
      // between the closed fingers after the squeeze
      CHECK(std::fabs((after - c).dot(u)) <= a.aperture / 2.0 + 1e-12);
      CHECK(after.z == before.z);  // planar motion only
      if (!(after == before)) ++moved;
    }
  }
  CHECK(moved > 0);
}

TEST_CASE("apply_grasp that misses the clay is an exact no-op") {
  OccupancyGrid grid;
  SimConfig cfg;
  ClayBody body = place_chunk({}, grid, placement_at(grid, {2, 2, 0}), cfg, 3);
  GraspAction miss{0.9, 0.9, 0.9, 0.0, 0.02};
  ClayBody out = apply_grasp(body, miss, cfg);
  REQUIRE(out.particles.size() == body.particles.size());
  for (std::size_t i = 0; i < out.particles.size(); ++i)
    CHECK(out.particles.points[i] == body.particles.points[i]);
}

TEST_CASE("apply_grasp wide aperture squeezes nothing") {
  OccupancyGrid grid;
  SimConfig cfg;
  ClayBody body = place_chunk({}, grid, placement_at(grid, {2, 2, 0}), cfg, 3);
  const Point3 cc = grid.cell_center({2, 2, 0});
  // aperture wider than the ball: no particle is beyond the finger planes
  GraspAction wide{cc.x, cc.y, cfg.r_chunk, 0.0, 0.04};
  ClayBody out = apply_grasp(body, wide, cfg);
  for (std::size_t i = 0; i < out.particles.size(); ++i)
    CHECK(out.particles.points[i] == body.particles.points[i]);
}

TEST_CASE("action bounds normalize/denormalize roundtrip and clamp") {
  ActionBounds bounds;
  GraspAction a{0.03, 0.05, 0.01, 0.7, 0.02};
  auto n = bounds.normalize(a);
  for (double v : n) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  GraspAction back = bounds.denormalize(n);
  CHECK(back.x == doctest::Approx(a.x).epsilon(1e-12));
  CHECK(back.y == doctest::Approx(a.y).epsilon(1e-12));
  CHECK(back.z == doctest::Approx(a.z).epsilon(1e-12));
  CHECK(back.rot_z == doctest::Approx(a.rot_z).epsilon(1e-12));
  CHECK(back.aperture == doctest::Approx(a.aperture).epsilon(1e-12));
  CHECK(bounds.contains(a));
  // out-of-range normalized inputs clamp to the box
  GraspAction clamped = bounds.denormalize({5.0, -5.0, 0.0, 0.0, 0.0});
  CHECK(clamped.x == bounds.hi[0]);
  CHECK(clamped.y == bounds.lo[1]);
  CHECK(bounds.contains(clamped));
  CHECK_FALSE(bounds.contains(GraspAction{-0.01, 0.0, 0.0, 0.0, 0.02}));
}

TEST_CASE("observe noise semantics") {
  OccupancyGrid grid;
  SimConfig cfg;
  ClayBody body = place_chunk({}, grid, placement_at(grid, {2, 2, 0}), cfg, 3);

  // sigma = 0 returns the particles verbatim
  PointCloud clean = observe(body, 0.0, 123);
  REQUIRE(clean.size() == body.particles.size());
  for (std::size_t i = 0; i < clean.size(); ++i)
    CHECK(clean.points[i] == body.particles.points[i]);

  // noisy observation perturbs every particle, deterministically per seed
  PointCloud noisy = observe(body, 0.001, 123);
  PointCloud noisy2 = observe(body, 0.001, 123);
  REQUIRE(noisy.size() == body.particles.size());
  int perturbed = 0;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    if (!(noisy.points[i] == body.particles.points[i])) ++perturbed;
    CHECK(noisy.points[i] == noisy2.points[i]);
  }
  CHECK(perturbed == static_cast<int>(noisy.size()));

  ClayBody empty;
  CHECK_THROWS_AS(observe(empty, 0.0, 1), InvalidState);
}
