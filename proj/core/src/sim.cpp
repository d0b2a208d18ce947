#include "sculpt/sim.hpp"

#include <algorithm>
#include <cmath>

#include "sculpt/errors.hpp"
#include "sculpt/rng.hpp"

namespace sculpt {

std::array<double, 5> ActionBounds::normalize(const GraspAction& a) const {
  auto v = a.as_array();
  std::array<double, 5> out;
  for (int i = 0; i < 5; ++i)
    out[i] = 2.0 * (v[i] - lo[i]) / (hi[i] - lo[i]) - 1.0;
  return out;
}

GraspAction ActionBounds::denormalize(const std::array<double, 5>& n) const {
  std::array<double, 5> v;
  for (int i = 0; i < 5; ++i)
    v[i] = lo[i] + (std::clamp(n[i], -1.0, 1.0) + 1.0) * 0.5 * (hi[i] - lo[i]);
  return GraspAction::from_array(v);
}

bool ActionBounds::contains(const GraspAction& a) const {
  auto v = a.as_array();
  for (int i = 0; i < 5; ++i)
    if (v[i] < lo[i] || v[i] > hi[i]) return false;
  return true;
}

ClayBody place_chunk(const ClayBody& body, const OccupancyGrid& grid,
                     const ChunkPlacement& placement, const SimConfig& cfg,
                     std::uint64_t seed) {
  if (!grid.in_range(placement.cell))
    throw InvalidArgument("place_chunk: cell out of range");
  for (const auto& c : body.placed_cells)
    if (c == placement.cell)
      throw InvalidArgument("place_chunk: cell already occupied");

  const Point3 cc = grid.cell_center(placement.cell);
  const double r = cfg.r_chunk;

  // Rest height: on the floor, or on top of existing particles in the column
  // (particles whose xy is within the ball footprint).
  double top = cfg.floor_z;
  bool supported = false;
  for (const auto& p : body.particles.points) {
    double dx = p.x - cc.x, dy = p.y - cc.y;
    if (dx * dx + dy * dy <= r * r && p.z > top) {
      top = p.z;
      supported = true;
    }
  }
  double center_z = supported ? top + r - cfg.delta_merge : cfg.floor_z + r;

  ClayBody out = body;
  Rng rng = Rng(seed).substream("chunk");
  out.particles.points.reserve(out.particles.size() + cfg.n_chunk);
  for (int i = 0; i < cfg.n_chunk; ++i) {
    // uniform in the unit ball by rejection
    double x, y, z;
    do {
      x = rng.uniform(-1.0, 1.0);
      y = rng.uniform(-1.0, 1.0);
      z = rng.uniform(-1.0, 1.0);
    } while (x * x + y * y + z * z > 1.0);
    out.particles.points.push_back({cc.x + r * x, cc.y + r * y, center_z + r * z});
  }
  const double ball_volume = 4.0 / 3.0 * M_PI * r * r * r;
  out.particle_volume = ball_volume / cfg.n_chunk;
  out.placed_cells.push_back(placement.cell);
  return out;
}

ClayBody apply_grasp(const ClayBody& body, const GraspAction& action,
                     const SimConfig& cfg) {
  const Point3 c{action.x, action.y, action.z};
  const Point3 u{std::cos(action.rot_z), std::sin(action.rot_z), 0.0};
  const Point3 n{-std::sin(action.rot_z), std::cos(action.rot_z), 0.0};
  const double half_ap = action.aperture / 2.0;

  ClayBody out = body;
  auto& pts = out.particles.points;

  // First pass: squeeze particles between the closing fingers onto the finger
  // planes at +-aperture/2 along u.
  double total_depth = 0.0;
  int squeezed = 0;
  std::vector<std::size_t> band;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Point3 d = pts[i] - c;
    double s = d.dot(u), t = d.dot(n);
    if (std::fabs(t) > cfg.finger_width / 2.0 ||
        std::fabs(d.z) > cfg.finger_height / 2.0)
      continue;
    band.push_back(i);
    if (std::fabs(s) > half_ap) {
      double depth = std::fabs(s) - half_ap;
      double target = (s > 0 ? half_ap : -half_ap);
      pts[i] = pts[i] + u * (target - s);
      total_depth += depth;
      ++squeezed;
    }
  }
  if (squeezed == 0) return out;  // grasp missed the clay

  // Second pass: volume-preservation bulge; band particles move outward
  // in-plane by a uniform fraction of the mean squeezed depth.
  const double bulge = cfg.bulge_coeff * total_depth / squeezed;
  for (std::size_t i : band) {
    double t = (pts[i] - c).dot(n);
    double dir = t >= 0.0 ? 1.0 : -1.0;
    pts[i] = pts[i] + n * (dir * bulge);
  }
  return out;
}

PointCloud observe(const ClayBody& body, double noise_sigma, std::uint64_t seed) {
  if (body.particles.empty()) throw InvalidState("observe: empty clay body");
  if (noise_sigma == 0.0) return body.particles;
  PointCloud out = body.particles;
  Rng rng = Rng(seed).substream("observe");
  for (auto& p : out.points) {
    p.x += rng.gaussian(0.0, noise_sigma);
    p.y += rng.gaussian(0.0, noise_sigma);
    p.z += rng.gaussian(0.0, noise_sigma);
  }
  return out;
}

}  // namespace sculpt
