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

#ifndef REACTIVE_HORIZON_REACTIVE_CONTROLLER_H_
#define REACTIVE_HORIZON_REACTIVE_CONTROLLER_H_

#include <stdexcept>
#include <vector>

#include "reactive_horizon/dynamics.h"
#include "reactive_horizon/geometry.h"

namespace reactive_horizon {

// Short-horizon MPC that trades off obstacle clearance, staying near the
// detection anchor, and coming to rest.
struct ReactParams {
  int horizon = 10;              // prediction steps H
  double dt = 0.1;               // s per prediction step
  double weight_obstacle = 1.0;  // gain on 1 / (clearance + 0.05)
  double weight_anchor = 4.0;    // gain on squared distance from the anchor
  double weight_speed = 10.0;    // gain on terminal speed norm squared
  double rest_threshold = 1e-2;  // maneuver-complete speed norm
  double time_cap = 10.0;        // s before the maneuver counts as failed

  // Throws std::invalid_argument on nonpositive dt, H < 2, negative gains.
  void Validate() const;
};

class ManeuverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReactStepResult {
  ControlInput control;
  // True when the inner optimization produced a non-finite iterate and the
  // controller fell back to maximal braking.
  bool fallback = false;
};

// One receding-horizon step: optimizes the control sequence over the horizon
// by projected gradient and returns the first control, always within bounds.
ReactStepResult ReactStep(const RobotState& x, const RobotState& anchor,
                          const ConvexPolygon& obstacle, const ReactParams& rp,
                          const ModelParams& model);

struct ManeuverResult {
  // States sampled every `sub_dt`, starting at x0, ending at rest.
  std::vector<RobotState> path;
  // Control applied over [path[k], path[k+1]); size path.size() - 1.
  std::vector<ControlInput> controls;
  bool used_fallback = false;
  double duration = 0.0;  // s
};

// Runs ReactStep in closed loop, holding each control for rp.dt and
// integrating at sub_dt, until the speed norm falls below rest_threshold;
// then brakes the residual speed off to below 1e-3. Throws ManeuverError if
// rest is not reached within rp.time_cap.
ManeuverResult RunManeuver(const RobotState& x0, const ConvexPolygon& obstacle,
                           const ReactParams& rp, const ModelParams& model,
                           double sub_dt = 0.02);

}  // namespace reactive_horizon

#endif  // REACTIVE_HORIZON_REACTIVE_CONTROLLER_H_
