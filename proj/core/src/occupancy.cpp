#include "sculpt/occupancy.hpp"

#include <sstream>

#include "sculpt/errors.hpp"

namespace sculpt {

OccupancyGrid::OccupancyGrid(std::array<int, 3> dims, double cell_size,
                             Point3 origin)
    : dims_(dims), cell_size_(cell_size), origin_(origin),
      cells_(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], 0) {
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1 || cell_size <= 0.0)
    throw InvalidArgument("OccupancyGrid: bad dims or cell size");
}

int OccupancyGrid::flat(const CellIndex& c) const {
  return (c.k * dims_[1] + c.j) * dims_[0] + c.i;
}

bool OccupancyGrid::in_range(const CellIndex& c) const {
  return c.i >= 0 && c.i < dims_[0] && c.j >= 0 && c.j < dims_[1] && c.k >= 0 &&
         c.k < dims_[2];
}

bool OccupancyGrid::occupied(const CellIndex& c) const {
  if (!in_range(c)) throw InvalidArgument("OccupancyGrid: index out of range");
  return cells_[flat(c)] != 0;
}

void OccupancyGrid::set(const CellIndex& c, bool value) {
  if (!in_range(c)) throw InvalidArgument("OccupancyGrid: index out of range");
  cells_[flat(c)] = value ? 1 : 0;
}

Point3 OccupancyGrid::cell_center(const CellIndex& c) const {
  return {origin_.x + (c.i + 0.5) * cell_size_,
          origin_.y + (c.j + 0.5) * cell_size_,
          origin_.z + (c.k + 0.5) * cell_size_};
}

std::vector<CellIndex> OccupancyGrid::occupied_cells() const {
  std::vector<CellIndex> out;
  for (int k = 0; k < dims_[2]; ++k)
    for (int j = 0; j < dims_[1]; ++j)
      for (int i = 0; i < dims_[0]; ++i)
        if (cells_[flat({i, j, k})]) out.push_back({i, j, k});
  return out;
}

int OccupancyGrid::occupied_count() const {
  int n = 0;
  for (char c : cells_) n += c != 0;
  return n;
}

std::string OccupancyGrid::to_text() const {
  std::ostringstream out;
  for (int k = 0; k < dims_[2]; ++k) {
    out << "layer k=" << k << "\n";
    for (int j = dims_[1] - 1; j >= 0; --j) {
      for (int i = 0; i < dims_[0]; ++i)
        out << (cells_[flat({i, j, k})] ? '1' : '0');
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace sculpt
