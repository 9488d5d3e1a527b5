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

#include "reactive_horizon/sensor.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reactive_horizon {
namespace {

constexpr double kWitnessSpacing = 0.02;  // m along obstacle boundaries

// True iff the open segment (a, b) passes through the polygon interior.
// Touching the boundary does not occlude.
bool SegmentCrossesInterior(const Vector2d& a, const Vector2d& b,
                            const ConvexPolygon& poly) {
  double t_lo = 0.0, t_hi = 1.0;
  const Vector2d d = b - a;
  for (const HalfSpace& f : poly.faces()) {
    const double num = f.offset - f.normal.dot(a);
    const double den = f.normal.dot(d);
    if (std::abs(den) < 1e-15) {
      if (num < 0.0) return false;
      continue;
    }
    const double t = num / den;
    if (den > 0.0) {
      t_hi = std::min(t_hi, t);
    } else {
      t_lo = std::max(t_lo, t);
    }
    if (t_lo >= t_hi) return false;
  }
  if (t_hi - t_lo <= 1e-12) return false;
  // Guard against grazing contact: the midpoint must be strictly interior.
  const Vector2d mid = a + 0.5 * (t_lo + t_hi) * d;
  return poly.ContainmentViolation(mid) < -1e-12;
}

bool InsideAnyObstacle(const Vector2d& p,
                       const std::vector<ConvexPolygon>& obstacles,
                       double tol) {
  for (const ConvexPolygon& o : obstacles) {
    if (o.Contains(p, tol)) return true;
  }
  return false;
}

}  // namespace

void SensorParams::Validate() const {
  if (range <= 0.0) throw std::invalid_argument("sensor range must be positive");
  if (half_angle <= 0.0 || half_angle >= M_PI / 2.0) {
    throw std::invalid_argument("sensor half angle must be in (0, pi/2)");
  }
}

ConvexPolygon FovPolygon(const RobotState& x, const SensorParams& sp) {
  const Matrix2d r = RotationMatrix(x.heading);
  const double c = std::cos(sp.half_angle);
  const double s = std::sin(sp.half_angle);
  return ConvexPolygon::FromVertices(
      {x.position, x.position + r * Vector2d(sp.range * c, -sp.range * s),
       x.position + r * Vector2d(sp.range * c, sp.range * s)});
}

bool Visible(const Vector2d& p, const RobotState& x,
             const std::vector<ConvexPolygon>& true_obstacles,
             const SensorParams& sp) {
  if (!FovPolygon(x, sp).Contains(p)) return false;
  for (const ConvexPolygon& o : true_obstacles) {
    if (SegmentCrossesInterior(x.position, p, o)) return false;
  }
  return true;
}

BeliefMap::BeliefMap(const Vector2d& min_corner, const Vector2d& max_corner,
                     double cell_size)
    : observed_free_(min_corner, max_corner, cell_size) {}

void BeliefMap::AddKnownObstacle(const ConvexPolygon& obstacle) {
  known_obstacles_.push_back(obstacle);
  // Retract any free claim the obstacle overlaps. The circumscribed-disc
  // radius makes the retraction cover whole cell rectangles.
  const double reach = 0.5 * observed_free_.cell_size() * std::sqrt(2.0);
  MarkPolygon(&observed_free_, obstacle, reach, false);
}

void BeliefMap::SeedFreeDisc(const Vector2d& center, double radius) {
  int ix0, iy0, ix1, iy1;
  observed_free_.CellOf(center - Vector2d(radius, radius), &ix0, &iy0);
  observed_free_.CellOf(center + Vector2d(radius, radius), &ix1, &iy1);
  ix0 = std::clamp(ix0, 0, observed_free_.width() - 1);
  iy0 = std::clamp(iy0, 0, observed_free_.height() - 1);
  ix1 = std::clamp(ix1, 0, observed_free_.width() - 1);
  iy1 = std::clamp(iy1, 0, observed_free_.height() - 1);
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      const Vector2d c = observed_free_.CellCenter(ix, iy);
      if ((c - center).norm() > radius) continue;
      if (InsideAnyObstacle(c, known_obstacles_, 0.0)) continue;
      observed_free_.Set(ix, iy, true);
    }
  }
}

std::vector<DetectionEvent> Detect(
    const RobotState& x, double time,
    const std::vector<ConvexPolygon>& true_obstacles, const BeliefMap& belief,
    const SensorParams& sp) {
  std::vector<DetectionEvent> events;
  const ConvexPolygon fov = FovPolygon(x, sp);
  Vector2d fov_lo, fov_hi;
  fov.BoundingBox(&fov_lo, &fov_hi);
  for (const ConvexPolygon& o : true_obstacles) {
    Vector2d lo, hi;
    o.BoundingBox(&lo, &hi);
    if ((lo.array() > fov_hi.array()).any() ||
        (hi.array() < fov_lo.array()).any()) {
      continue;
    }
    bool witnessed = false;
    const auto& vs = o.vertices();
    for (size_t i = 0; i < vs.size() && !witnessed; ++i) {
      const Vector2d& a = vs[i];
      const Vector2d& b = vs[(i + 1) % vs.size()];
      const int steps =
          std::max(1, static_cast<int>(std::ceil((b - a).norm() /
                                                 kWitnessSpacing)));
      for (int s = 0; s <= steps; ++s) {
        const Vector2d p = a + (b - a) * (static_cast<double>(s) / steps);
        // A witness must be news: outside everything already believed in.
        if (InsideAnyObstacle(p, belief.known_obstacles(), 1e-9)) continue;
        if (Visible(p, x, true_obstacles, sp)) {
          witnessed = true;
          break;
        }
      }
    }
    if (witnessed) events.push_back({time, o, x});
  }
  return events;
}

void UpdateBelief(BeliefMap* belief, const RobotState& x,
                  const std::vector<DetectionEvent>& events,
                  const std::vector<ConvexPolygon>& true_obstacles,
                  const SensorParams& sp) {
  for (const DetectionEvent& e : events) {
    belief->AddKnownObstacle(e.obstacle);
  }
  const ConvexPolygon fov = FovPolygon(x, sp);
  OccupancyGrid* grid = &belief->observed_free_;
  Vector2d lo, hi;
  fov.BoundingBox(&lo, &hi);
  int ix0, iy0, ix1, iy1;
  grid->CellOf(lo, &ix0, &iy0);
  grid->CellOf(hi, &ix1, &iy1);
  ix0 = std::clamp(ix0, 0, grid->width() - 1);
  iy0 = std::clamp(iy0, 0, grid->height() - 1);
  ix1 = std::clamp(ix1, 0, grid->width() - 1);
  iy1 = std::clamp(iy1, 0, grid->height() - 1);
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      if (grid->Get(ix, iy)) continue;
      const Vector2d c = grid->CellCenter(ix, iy);
      if (!fov.Contains(c)) continue;
      if (InsideAnyObstacle(c, belief->known_obstacles_, 0.0)) continue;
      if (Visible(c, x, true_obstacles, sp)) grid->Set(ix, iy, true);
    }
  }
}

}  // namespace reactive_horizon
