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

#include "reactive_horizon/reactive_controller.h"

#include <cmath>
#include <random>

#include "gtest/gtest.h"

namespace reactive_horizon {
namespace {

RobotState MovingState(double v, double omega = 0.0, double heading = 0.0) {
  RobotState x;
  x.heading = heading;
  x.linear_speed = v;
  x.angular_speed = omega;
  return x;
}

TEST(ReactParamsTest, Validation) {
  ReactParams rp;
  EXPECT_NO_THROW(rp.Validate());
  rp.horizon = 1;
  EXPECT_THROW(rp.Validate(), std::invalid_argument);
  rp = ReactParams{};
  rp.weight_anchor = -1.0;
  EXPECT_THROW(rp.Validate(), std::invalid_argument);
}

TEST(ReactStepTest, AtRestFarFromObstacleIsQuiet) {
  const ReactParams rp;
  const ModelParams model;
  const RobotState x = MovingState(0.0);
  const auto far_box = ConvexPolygon::AxisAlignedBox({50, 50}, {51, 51});
  const ReactStepResult r = ReactStep(x, x, far_box, rp, model);
  EXPECT_FALSE(r.fallback);
  EXPECT_LE(std::hypot(r.control.linear_accel, r.control.angular_accel), 1e-3);
}

TEST(ReactStepTest, BrakesHardTowardWallAhead) {
  const ReactParams rp;
  const ModelParams model;
  const RobotState x = MovingState(1.0);
  const auto wall = ConvexPolygon::AxisAlignedBox({1.0, -2.0}, {1.3, 2.0});
  const ReactStepResult r = ReactStep(x, x, wall, rp, model);
  EXPECT_FALSE(r.fallback);
  EXPECT_LE(r.control.linear_accel, -0.9 * model.a_max);
}

TEST(ReactStepTest, ControlsAlwaysWithinBounds) {
  const ReactParams rp;
  const ModelParams model;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const RobotState x = MovingState(2 * unit(rng) - 1, 2 * unit(rng) - 1,
                                     6 * unit(rng) - 3);
    const auto box = ConvexPolygon::OrientedBox(
        {3 * unit(rng) - 1.5, 3 * unit(rng) - 1.5}, 0.2 + 0.5 * unit(rng),
        0.2 + 0.5 * unit(rng), 6 * unit(rng));
    const ReactStepResult r = ReactStep(x, x, box, rp, model);
    EXPECT_LE(std::abs(r.control.linear_accel), model.a_max + 1e-12);
    EXPECT_LE(std::abs(r.control.angular_accel), model.alpha_max + 1e-12);
  }
}

TEST(RunManeuverTest, AtRestReturnsSinglePoint) {
  const ReactParams rp;
  const ModelParams model;
  const auto box = ConvexPolygon::AxisAlignedBox({1, -1}, {2, 1});
  const ManeuverResult m = RunManeuver(MovingState(0.0), box, rp, model);
  EXPECT_EQ(m.path.size(), 1u);
  EXPECT_TRUE(m.controls.empty());
  EXPECT_EQ(m.duration, 0.0);
}

TEST(RunManeuverTest, StopsBeforeWallOneMeterAhead) {
  const ReactParams rp;
  const ModelParams model;
  const auto wall = ConvexPolygon::AxisAlignedBox({1.0, -2.0}, {1.2, 2.0});
  const ManeuverResult m = RunManeuver(MovingState(1.0), wall, rp, model);
  const RobotState& final_state = m.path.back();
  EXPECT_LT(std::hypot(final_state.linear_speed, final_state.angular_speed),
            1e-3);
  // 1D stopping distance is 0.5 m; the wall face is 1 m ahead.
  EXPECT_GT(PointPolygonDistance(final_state.position, wall), 0.4);
  for (const RobotState& s : m.path) {
    EXPECT_FALSE(wall.Contains(s.position));
  }
}

TEST(RunManeuverTest, DisplacementBoundedByTwiceStoppingDistance) {
  const ReactParams rp;
  const ModelParams model;
  // Obstacle behind; nothing forces a detour, so the stop should land near
  // the 1D stopping point and well within twice its distance.
  const auto behind = ConvexPolygon::AxisAlignedBox({-2.0, -1.0}, {-1.0, 1.0});
  const ManeuverResult m = RunManeuver(MovingState(1.0), behind, rp, model);
  const double stop_1d = 0.5;  // v^2 / (2 a_max)
  double max_disp = 0.0;
  for (const RobotState& s : m.path) {
    max_disp = std::max(max_disp, s.position.norm());
  }
  EXPECT_GE(max_disp, 0.9 * stop_1d);  // cannot stop faster than the bound
  EXPECT_LE(max_disp, 2.0 * stop_1d);
}

TEST(RunManeuverTest, ReachesRestAcrossSpeedGrid) {
  const ReactParams rp;
  const ModelParams model;
  const auto box = ConvexPolygon::AxisAlignedBox({0.8, -0.4}, {1.6, 0.4});
  for (double v : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    for (double w : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      const ManeuverResult m = RunManeuver(MovingState(v, w), box, rp, model);
      const RobotState& e = m.path.back();
      EXPECT_LT(std::hypot(e.linear_speed, e.angular_speed), 1e-3)
          << "v=" << v << " w=" << w;
      EXPECT_LE(m.duration, rp.time_cap);
    }
  }
}

TEST(RunManeuverTest, TimeCapSurfacesAsError) {
  ReactParams rp;
  rp.time_cap = 1.0;
  const ModelParams model;
  // Braking from v_max takes v/a_max = 2 s, twice the cap.
  const auto box = ConvexPolygon::AxisAlignedBox({4.0, -0.5}, {5.0, 0.5});
  EXPECT_THROW(RunManeuver(MovingState(2.0), box, rp, model), ManeuverError);
}

TEST(RunManeuverTest, Deterministic) {
  const ReactParams rp;
  const ModelParams model;
  const auto box = ConvexPolygon::OrientedBox({0.9, 0.2}, 0.4, 0.3, 0.5);
  const ManeuverResult a = RunManeuver(MovingState(1.2, 0.6), box, rp, model);
  const ManeuverResult b = RunManeuver(MovingState(1.2, 0.6), box, rp, model);
  ASSERT_EQ(a.path.size(), b.path.size());
  for (size_t i = 0; i < a.path.size(); ++i) {
    EXPECT_EQ(a.path[i].position, b.path[i].position);
    EXPECT_EQ(a.path[i].linear_speed, b.path[i].linear_speed);
  }
}

}  // namespace
}  // namespace reactive_horizon
