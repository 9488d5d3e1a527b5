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

#ifndef REACTIVE_HORIZON_SENSOR_H_
#define REACTIVE_HORIZON_SENSOR_H_

#include <vector>

#include "reactive_horizon/dynamics.h"
#include "reactive_horizon/geometry.h"
#include "reactive_horizon/occupancy_grid.h"

namespace reactive_horizon {

// Triangular field of view: apex at the robot, axis along the heading,
// equal sides of length `range`, apex half-angle `half_angle`.
struct SensorParams {
  double range = 2.0;                  // m
  double half_angle = M_PI / 3.0;      // rad, total aperture 120 degrees

  // Throws std::invalid_argument unless range > 0 and 0 < half_angle < pi/2.
  void Validate() const;
};

// An unknown obstacle entering the field of view with a clear sightline.
struct DetectionEvent {
  double time = 0.0;
  ConvexPolygon obstacle;
  RobotState robot_state;
};

// The planner's map estimate: polygonal obstacles it believes in, plus the
// grid of cells it has actually observed to be free. Cells only accumulate,
// except where a detected obstacle forces a retraction.
class BeliefMap {
 public:
  BeliefMap(const Vector2d& min_corner, const Vector2d& max_corner,
            double cell_size = 0.05);

  const std::vector<ConvexPolygon>& known_obstacles() const {
    return known_obstacles_;
  }
  const OccupancyGrid& observed_free() const { return observed_free_; }
  OccupancyGrid* mutable_observed_free() { return &observed_free_; }

  // Appends the obstacle and retracts observed-free cells it overlaps
  // (cell-rectangle overlap, conservatively via the circumscribed disc).
  void AddKnownObstacle(const ConvexPolygon& obstacle);

  // Marks every cell whose center is inside the disc as observed free,
  // skipping centers inside known obstacles. Models a prior observed region
  // around the start pose.
  void SeedFreeDisc(const Vector2d& center, double radius);

  bool CellObservedFree(int ix, int iy) const {
    return observed_free_.Get(ix, iy);
  }

 private:
  friend void UpdateBelief(BeliefMap* belief, const RobotState& x,
                           const std::vector<DetectionEvent>& events,
                           const std::vector<ConvexPolygon>& true_obstacles,
                           const SensorParams& sp);

  std::vector<ConvexPolygon> known_obstacles_;
  OccupancyGrid observed_free_;
};

// The field-of-view triangle at a robot pose.
ConvexPolygon FovPolygon(const RobotState& x, const SensorParams& sp);

// True iff p lies in the field of view and the sightline from the robot to p
// does not cross the interior of any true obstacle.
bool Visible(const Vector2d& p, const RobotState& x,
             const std::vector<ConvexPolygon>& true_obstacles,
             const SensorParams& sp);

// One event per true obstacle that is not yet accounted for by the belief:
// an obstacle is reported when some boundary sample (2 cm spacing) is
// visible and lies outside every known obstacle.
std::vector<DetectionEvent> Detect(
    const RobotState& x, double time,
    const std::vector<ConvexPolygon>& true_obstacles, const BeliefMap& belief,
    const SensorParams& sp);

// Applies one sensing step: appends detected obstacles (retracting their
// cells), then marks every visible cell center observed free.
void UpdateBelief(BeliefMap* belief, const RobotState& x,
                  const std::vector<DetectionEvent>& events,
                  const std::vector<ConvexPolygon>& true_obstacles,
                  const SensorParams& sp);

}  // namespace reactive_horizon

#endif  // REACTIVE_HORIZON_SENSOR_H_
