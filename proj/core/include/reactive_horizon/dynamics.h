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

#ifndef REACTIVE_HORIZON_DYNAMICS_H_
#define REACTIVE_HORIZON_DYNAMICS_H_

#include <Eigen/Dense>

#include "reactive_horizon/geometry.h"

namespace reactive_horizon {

// State vector layout: (px, py, heading, linear speed, angular speed).
using StateVector = Eigen::Matrix<double, 5, 1>;
// Control vector layout: (linear accel, angular accel).
using ControlVector = Eigen::Vector2d;

enum StateIndex : int {
  kStateX = 0,
  kStateY = 1,
  kStateHeading = 2,
  kStateSpeed = 3,
  kStateTurnRate = 4,
};

// Symmetric actuation and speed limits for the differential drive model.
struct ModelParams {
  double v_max = 2.0;      // m/s
  double omega_max = 2.0;  // rad/s
  double a_max = 1.0;      // m/s^2
  double alpha_max = 2.0;  // rad/s^2

  // Throws std::invalid_argument unless all limits are strictly positive.
  void Validate() const;
};

struct RobotState {
  Vector2d position = Vector2d::Zero();
  double heading = 0.0;        // rad, kept in (-pi, pi]
  double linear_speed = 0.0;   // m/s
  double angular_speed = 0.0;  // rad/s

  StateVector ToVector() const;
  static RobotState FromVector(const StateVector& x);
};

struct ControlInput {
  double linear_accel = 0.0;   // m/s^2
  double angular_accel = 0.0;  // rad/s^2

  ControlVector ToVector() const;
  static ControlInput FromVector(const ControlVector& u);
};

// Wraps an angle to (-pi, pi].
double WrapAngle(double angle);

// Unicycle kinematics with acceleration controls:
// f(x, u) = (v cos h, v sin h, omega, a, alpha).
StateVector Derivative(const StateVector& x, const ControlVector& u);

// Jacobians of the derivative, d f / d x (5x5) and d f / d u (5x2).
void DerivativeJacobians(const StateVector& x,
                         Eigen::Matrix<double, 5, 5>* df_dx,
                         Eigen::Matrix<double, 5, 2>* df_du);

// One RK4 step with the control held constant, then the speeds are clamped
// to the model limits and the heading is wrapped.
RobotState Integrate(const RobotState& x, const ControlInput& u, double dt,
                     const ModelParams& params);

// Trapezoidal collocation defect x_j - x_i - (h/2)(f_i + f_j). The heading
// difference is taken on the circle so trajectories crossing +-pi do not
// produce spurious defects.
StateVector Defect(const RobotState& x_i, const ControlInput& u_i,
                   const RobotState& x_j, const ControlInput& u_j, double h);

// Same defect on raw state vectors with the heading treated as an unwrapped
// real line coordinate. This is the form the trajectory optimizer uses.
StateVector DefectUnwrapped(const StateVector& x_i, const ControlVector& u_i,
                            const StateVector& x_j, const ControlVector& u_j,
                            double h);

struct Interval1d {
  double lo = 0.0;
  double hi = 0.0;
};

// Positions reachable before a full stop for a double integrator starting at
// x1 with speed v under |u| <= u_max: the braking interval of length
// v^2 / (2 u_max) on the side the robot is moving toward.
Interval1d StoppingInterval1d(double x1, double v, double u_max);

}  // namespace reactive_horizon

#endif  // REACTIVE_HORIZON_DYNAMICS_H_
