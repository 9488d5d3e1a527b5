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

#include "reactive_horizon/occupancy_grid.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace reactive_horizon {

OccupancyGrid::OccupancyGrid(const Vector2d& min_corner,
                             const Vector2d& max_corner, double cell_size)
    : min_corner_(min_corner), cell_size_(cell_size) {
  if (cell_size <= 0.0) {
    throw std::invalid_argument("cell size must be positive");
  }
  const Vector2d extent = max_corner - min_corner;
  if (extent.x() <= 0.0 || extent.y() <= 0.0) {
    throw std::invalid_argument("grid bounds must have positive extent");
  }
  width_ = std::max(1, static_cast<int>(std::ceil(extent.x() / cell_size - 1e-9)));
  height_ = std::max(1, static_cast<int>(std::ceil(extent.y() / cell_size - 1e-9)));
  cells_.assign(static_cast<size_t>(width_) * height_, 0);
}

bool OccupancyGrid::CellOf(const Vector2d& p, int* ix, int* iy) const {
  const Vector2d rel = (p - min_corner_) / cell_size_;
  *ix = static_cast<int>(std::floor(rel.x()));
  *iy = static_cast<int>(std::floor(rel.y()));
  return InBounds(*ix, *iy);
}

void OccupancyGrid::Fill(bool value) {
  std::fill(cells_.begin(), cells_.end(), value ? 1 : 0);
}

std::int64_t OccupancyGrid::CountSet() const {
  return std::accumulate(cells_.begin(), cells_.end(), std::int64_t{0});
}

void MarkPolygon(OccupancyGrid* grid, const ConvexPolygon& poly, double radius,
                 bool value) {
  Vector2d lo, hi;
  poly.BoundingBox(&lo, &hi);
  lo.array() -= radius;
  hi.array() += radius;
  int ix0, iy0, ix1, iy1;
  grid->CellOf(lo, &ix0, &iy0);
  grid->CellOf(hi, &ix1, &iy1);
  ix0 = std::clamp(ix0, 0, grid->width() - 1);
  iy0 = std::clamp(iy0, 0, grid->height() - 1);
  ix1 = std::clamp(ix1, 0, grid->width() - 1);
  iy1 = std::clamp(iy1, 0, grid->height() - 1);
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      const Vector2d c = grid->CellCenter(ix, iy);
      if (poly.Contains(c) || PointPolygonDistance(c, poly) <= radius) {
        grid->Set(ix, iy, value);
      }
    }
  }
}

namespace {

// Nearest traversable cell to p within a ring radius, scanned in a fixed
// order so the result is deterministic.
bool SnapToTraversable(const OccupancyGrid& grid, const Vector2d& p,
                       int snap_radius, int* out_x, int* out_y) {
  int cx, cy;
  if (!grid.CellOf(p, &cx, &cy)) {
    cx = std::clamp(cx, 0, grid.width() - 1);
    cy = std::clamp(cy, 0, grid.height() - 1);
  }
  for (int r = 0; r <= snap_radius; ++r) {
    int best_x = -1, best_y = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
        const int x = cx + dx, y = cy + dy;
        if (!grid.InBounds(x, y) || !grid.Get(x, y)) continue;
        const double d2 = (grid.CellCenter(x, y) - p).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best_x = x;
          best_y = y;
        }
      }
    }
    if (best_x >= 0) {
      *out_x = best_x;
      *out_y = best_y;
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<Vector2d> PlanGridPath(const OccupancyGrid& traversable,
                                   const Vector2d& start, const Vector2d& goal,
                                   int snap_radius) {
  int sx, sy, gx, gy;
  if (!SnapToTraversable(traversable, start, snap_radius, &sx, &sy) ||
      !SnapToTraversable(traversable, goal, snap_radius, &gx, &gy)) {
    return {};
  }
  const int w = traversable.width();
  const int h = traversable.height();
  const auto index = [w](int x, int y) { return y * w + x; };
  const double kDiag = std::sqrt(2.0);
  const auto heuristic = [&](int x, int y) {
    const double dx = std::abs(x - gx), dy = std::abs(y - gy);
    return std::min(dx, dy) * kDiag + std::abs(dx - dy);  // octile
  };

  std::vector<double> cost(static_cast<size_t>(w) * h,
                           std::numeric_limits<double>::infinity());
  std::vector<int> parent(static_cast<size_t>(w) * h, -1);
  // (f, h, index): the extra keys make pop order and hence the returned path
  // independent of heap internals.
  using Node = std::tuple<double, double, int>;
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
  cost[index(sx, sy)] = 0.0;
  open.emplace(heuristic(sx, sy), heuristic(sx, sy), index(sx, sy));

  const int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  while (!open.empty()) {
    const auto [f, hh, cur] = open.top();
    open.pop();
    const int cx = cur % w, cy = cur / w;
    if (f > cost[cur] + heuristic(cx, cy) + 1e-12) continue;  // stale entry
    if (cx == gx && cy == gy) break;
    for (int k = 0; k < 8; ++k) {
      const int nx = cx + dxs[k], ny = cy + dys[k];
      if (!traversable.InBounds(nx, ny) || !traversable.Get(nx, ny)) continue;
      // No corner cutting: a diagonal move needs both adjacent cells free.
      if (k >= 4 && (!traversable.Get(cx, ny) || !traversable.Get(nx, cy))) {
        continue;
      }
      const double step = k >= 4 ? kDiag : 1.0;
      const double g = cost[cur] + step;
      const int ni = index(nx, ny);
      if (g < cost[ni] - 1e-12) {
        cost[ni] = g;
        parent[ni] = cur;
        open.emplace(g + heuristic(nx, ny), heuristic(nx, ny), ni);
      }
    }
  }

  const int goal_index = index(gx, gy);
  if (!std::isfinite(cost[goal_index])) return {};
  std::vector<Vector2d> path;
  for (int cur = goal_index; cur >= 0; cur = parent[cur]) {
    path.push_back(traversable.CellCenter(cur % w, cur / w));
    if (cur == index(sx, sy)) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace reactive_horizon
