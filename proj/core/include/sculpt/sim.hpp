#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sculpt/geometry.hpp"
#include "sculpt/occupancy.hpp"

namespace sculpt {

// Simulator constants (desk scale). The chunk radius is half the 1.5 cm grid
// cell so one ball fills one cell.
struct SimConfig {
  int n_chunk = 200;           // particles per placed chunk
  double r_chunk = 0.0075;     // m
  double delta_merge = 0.001;  // m, allowed interpenetration
  double finger_width = 0.02;  // m, w_f
  double finger_height = 0.02; // m, h_f
  double bulge_coeff = 0.5;    // fraction of squeezed depth redistributed
  double floor_z = 0.0;        // m
};

// 5D parallel-jaw grasp: end-effector center, rotation about z and final
// fingertip distance.
struct GraspAction {
  double x = 0.0, y = 0.0, z = 0.0;
  double rot_z = 0.0;     // radians in [-pi/2, pi/2)
  double aperture = 0.0;  // m

  std::array<double, 5> as_array() const { return {x, y, z, rot_z, aperture}; }
  static GraspAction from_array(const std::array<double, 5>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
};

// Per-dimension action bounds; also defines the affine normalization of each
// action dimension to [-1, 1].
struct ActionBounds {
  std::array<double, 5> lo{0.0, 0.0, 0.0, -1.5707963267948966, 0.005};
  std::array<double, 5> hi{0.075, 0.075, 0.075, 1.5707963267948966, 0.04};

  std::array<double, 5> normalize(const GraspAction& a) const;
  GraspAction denormalize(const std::array<double, 5>& n) const;
  bool contains(const GraspAction& a) const;
};

struct ClayBody {
  PointCloud particles;
  double particle_volume = 0.0;  // m^3 per particle, constant per body
  std::vector<CellIndex> placed_cells;
};

// Adds one ball of particles at the placement cell. The ball rests on the
// floor (k = 0) or on the particles already below it in the same column.
ClayBody place_chunk(const ClayBody& body, const OccupancyGrid& grid,
                     const ChunkPlacement& placement, const SimConfig& cfg,
                     std::uint64_t seed);

// Kinematic parallel-jaw squeeze: particles inside the finger sweep are
// projected to the closed finger planes, then an in-plane bulge pushes band
// particles outward to conserve volume. Particle count never changes; a grasp
// that misses the clay is a no-op.
ClayBody apply_grasp(const ClayBody& body, const GraspAction& action,
                     const SimConfig& cfg);

// Particle positions with i.i.d. Gaussian observation noise.
PointCloud observe(const ClayBody& body, double noise_sigma, std::uint64_t seed);

}  // namespace sculpt
