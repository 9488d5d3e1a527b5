// Copyright 2026 The Reactive Horizon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REACTIVE_HORIZON_OCCUPANCY_GRID_H_
#define REACTIVE_HORIZON_OCCUPANCY_GRID_H_

#include <cstdint>
#include <vector>

#include "reactive_horizon/geometry.h"

namespace reactive_horizon {

// Boolean occupancy raster over an axis-aligned world rectangle. Cell (0, 0)
// sits at the minimum corner; cells are addressed by integer column/row and
// queried by the cell-center rule throughout.
class OccupancyGrid {
 public:
  OccupancyGrid(const Vector2d& min_corner, const Vector2d& max_corner,
                double cell_size);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  const Vector2d& min_corner() const { return min_corner_; }
  Vector2d max_corner() const {
    return min_corner_ + cell_size_ * Vector2d(width_, height_);
  }

  bool InBounds(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < width_ && iy < height_;
  }
  Vector2d CellCenter(int ix, int iy) const {
    return min_corner_ + cell_size_ * Vector2d(ix + 0.5, iy + 0.5);
  }
  // False when p falls outside the raster.
  bool CellOf(const Vector2d& p, int* ix, int* iy) const;

  bool Get(int ix, int iy) const { return cells_[Index(ix, iy)] != 0; }
  void Set(int ix, int iy, bool value) {
    cells_[Index(ix, iy)] = value ? 1 : 0;
  }
  void Fill(bool value);
  std::int64_t CountSet() const;

  // Row-major backing store, one byte per cell, row 0 at the minimum corner.
  const std::vector<std::uint8_t>& data() const { return cells_; }

 private:
  int Index(int ix, int iy) const { return iy * width_ + ix; }

  Vector2d min_corner_;
  double cell_size_;
  int width_;
  int height_;
  std::vector<std::uint8_t> cells_;
};

// Writes `value` into every cell whose center lies inside the polygon or
// within `radius` of it. Used for obstacle rasterization and inflation.
void MarkPolygon(OccupancyGrid* grid, const ConvexPolygon& poly, double radius,
                 bool value);

// Deterministic 8-connected shortest path over traversable (= true) cells.
// Start and goal snap to the nearest traversable cell within `snap_radius`
// cells (ring search, fixed scan order). Returns cell-center waypoints from
// start to goal, or an empty list when no path exists.
std::vector<Vector2d> PlanGridPath(const OccupancyGrid& traversable,
                                   const Vector2d& start, const Vector2d& goal,
                                   int snap_radius = 8);

}  // namespace reactive_horizon

#endif  // REACTIVE_HORIZON_OCCUPANCY_GRID_H_
