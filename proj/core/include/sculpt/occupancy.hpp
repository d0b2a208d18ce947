#pragma once

#include <array>
#include <string>
#include <vector>

#include "sculpt/geometry.hpp"

namespace sculpt {

struct CellIndex {
  int i = 0, j = 0, k = 0;
  bool operator==(const CellIndex&) const = default;
  auto operator<=>(const CellIndex&) const = default;
};

// Discrete scene state: a fixed-dimension boolean grid of placeable cells.
class OccupancyGrid {
 public:
  OccupancyGrid(std::array<int, 3> dims = {5, 5, 5}, double cell_size = 0.015,
                Point3 origin = {0.0, 0.0, 0.0});

  const std::array<int, 3>& dims() const { return dims_; }
  double cell_size() const { return cell_size_; }
  const Point3& origin() const { return origin_; }

  bool in_range(const CellIndex& c) const;
  bool occupied(const CellIndex& c) const;
  void set(const CellIndex& c, bool value);

  // World-frame center of a cell.
  Point3 cell_center(const CellIndex& c) const;

  std::vector<CellIndex> occupied_cells() const;
  int occupied_count() const;

  bool operator==(const OccupancyGrid& o) const {
    return dims_ == o.dims_ && cells_ == o.cells_;
  }

  // Text rendering as stacked k-layers of 0/1 rows, used in LLM prompts and
  // audit logs.
  std::string to_text() const;

 private:
  std::array<int, 3> dims_;
  double cell_size_;
  Point3 origin_;
  std::vector<char> cells_;
  int flat(const CellIndex& c) const;
};

struct ChunkPlacement {
  CellIndex cell;
  Point3 world_center;
};

struct PlacementPlan {
  std::vector<ChunkPlacement> placements;
};

}  // namespace sculpt
