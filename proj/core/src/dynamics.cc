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

#include "reactive_horizon/dynamics.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reactive_horizon {

void ModelParams::Validate() const {
  if (v_max <= 0.0 || omega_max <= 0.0 || a_max <= 0.0 || alpha_max <= 0.0) {
    throw std::invalid_argument("model limits must be strictly positive");
  }
}

StateVector RobotState::ToVector() const {
  StateVector x;
  x << position.x(), position.y(), heading, linear_speed, angular_speed;
  return x;
}

RobotState RobotState::FromVector(const StateVector& x) {
  RobotState s;
  s.position = Vector2d(x[kStateX], x[kStateY]);
  s.heading = x[kStateHeading];
  s.linear_speed = x[kStateSpeed];
  s.angular_speed = x[kStateTurnRate];
  return s;
}

ControlVector ControlInput::ToVector() const {
  return ControlVector(linear_accel, angular_accel);
}

ControlInput ControlInput::FromVector(const ControlVector& u) {
  return ControlInput{u[0], u[1]};
}

double WrapAngle(double angle) {
  const double two_pi = 2.0 * M_PI;
  double a = std::fmod(angle, two_pi);
  if (a <= -M_PI) a += two_pi;
  if (a > M_PI) a -= two_pi;
  return a;
}

StateVector Derivative(const StateVector& x, const ControlVector& u) {
  StateVector dx;
  dx << x[kStateSpeed] * std::cos(x[kStateHeading]),
      x[kStateSpeed] * std::sin(x[kStateHeading]), x[kStateTurnRate], u[0],
      u[1];
  return dx;
}

void DerivativeJacobians(const StateVector& x,
                         Eigen::Matrix<double, 5, 5>* df_dx,
                         Eigen::Matrix<double, 5, 2>* df_du) {
  const double c = std::cos(x[kStateHeading]);
  const double s = std::sin(x[kStateHeading]);
  const double v = x[kStateSpeed];
  df_dx->setZero();
  (*df_dx)(kStateX, kStateHeading) = -v * s;
  (*df_dx)(kStateX, kStateSpeed) = c;
  (*df_dx)(kStateY, kStateHeading) = v * c;
  (*df_dx)(kStateY, kStateSpeed) = s;
  (*df_dx)(kStateHeading, kStateTurnRate) = 1.0;
  df_du->setZero();
  (*df_du)(kStateSpeed, 0) = 1.0;
  (*df_du)(kStateTurnRate, 1) = 1.0;
}

RobotState Integrate(const RobotState& x, const ControlInput& u, double dt,
                     const ModelParams& params) {
  const StateVector x0 = x.ToVector();
  const ControlVector uv = u.ToVector();
  const StateVector k1 = Derivative(x0, uv);
  const StateVector k2 = Derivative(x0 + 0.5 * dt * k1, uv);
  const StateVector k3 = Derivative(x0 + 0.5 * dt * k2, uv);
  const StateVector k4 = Derivative(x0 + dt * k3, uv);
  StateVector x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  x1[kStateHeading] = WrapAngle(x1[kStateHeading]);
  x1[kStateSpeed] = std::clamp(x1[kStateSpeed], -params.v_max, params.v_max);
  x1[kStateTurnRate] =
      std::clamp(x1[kStateTurnRate], -params.omega_max, params.omega_max);
  return RobotState::FromVector(x1);
}

StateVector Defect(const RobotState& x_i, const ControlInput& u_i,
                   const RobotState& x_j, const ControlInput& u_j, double h) {
  const StateVector f_i = Derivative(x_i.ToVector(), u_i.ToVector());
  const StateVector f_j = Derivative(x_j.ToVector(), u_j.ToVector());
  StateVector zeta = x_j.ToVector() - x_i.ToVector();
  zeta[kStateHeading] = WrapAngle(x_j.heading - x_i.heading);
  zeta -= 0.5 * h * (f_i + f_j);
  return zeta;
}

StateVector DefectUnwrapped(const StateVector& x_i, const ControlVector& u_i,
                            const StateVector& x_j, const ControlVector& u_j,
                            double h) {
  return x_j - x_i - 0.5 * h * (Derivative(x_i, u_i) + Derivative(x_j, u_j));
}

Interval1d StoppingInterval1d(double x1, double v, double u_max) {
  if (u_max <= 0.0) {
    throw std::invalid_argument("braking limit must be strictly positive");
  }
  const double reach = v * v / (2.0 * u_max);
  if (v >= 0.0) return {x1, x1 + reach};
  return {x1 - reach, x1};
}

}  // namespace reactive_horizon
