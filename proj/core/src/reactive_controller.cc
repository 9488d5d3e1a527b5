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

#include <algorithm>
#include <cmath>
#include <limits>

namespace reactive_horizon {
namespace {

constexpr double kClearanceOffset = 0.05;  // m, keeps the barrier finite
constexpr int kMaxPgIterations = 100;
constexpr double kRestFinal = 1e-3;  // terminal speed after residual braking

// Stage position costs (repulsion and anchor) are gated by translational
// speed: risk accrues only while the robot is actually moving. Without the
// gate the optimizer creeps away from nearby obstacles while spinning down,
// or creeps back toward the anchor after stopping, and the maneuver never
// crosses the rest threshold. With it, every resting point is stationary.
constexpr double kRepulsionSpeedGate = 0.3;  // m/s

double RepulsionGate(double v) {
  const double c2 = kRepulsionSpeedGate * kRepulsionSpeedGate;
  return v * v / (v * v + c2);
}

double RepulsionGateDv(double v) {
  const double c2 = kRepulsionSpeedGate * kRepulsionSpeedGate;
  const double denom = v * v + c2;
  return 2.0 * v * c2 / (denom * denom);
}

double SpeedNorm(const RobotState& x) {
  return std::hypot(x.linear_speed, x.angular_speed);
}

// Control sequence as an H x 2 column-stacked array.
using ControlSeq = Eigen::Matrix<double, Eigen::Dynamic, 2>;

ControlSeq ProjectToBox(ControlSeq u, const ModelParams& model) {
  for (int k = 0; k < u.rows(); ++k) {
    u(k, 0) = std::clamp(u(k, 0), -model.a_max, model.a_max);
    u(k, 1) = std::clamp(u(k, 1), -model.alpha_max, model.alpha_max);
  }
  return u;
}

struct Objective {
  const ConvexPolygon* obstacle;
  Vector2d anchor;
  const ReactParams* rp;

  // Forward Euler rollout of the prediction model. Speed clamping is left
  // out of the prediction; execution clamps, the penalty only steers.
  std::vector<StateVector> Rollout(const StateVector& x0,
                                   const ControlSeq& u) const {
    std::vector<StateVector> xs(u.rows() + 1);
    xs[0] = x0;
    for (int k = 0; k < u.rows(); ++k) {
      xs[k + 1] =
          xs[k] + rp->dt * Derivative(xs[k], u.row(k).transpose());
    }
    return xs;
  }

  double Cost(const std::vector<StateVector>& xs) const {
    double j = 0.0;
    for (size_t k = 1; k < xs.size(); ++k) {
      const Vector2d p(xs[k][kStateX], xs[k][kStateY]);
      const double clearance = PointPolygonDistance(p, *obstacle);
      j += RepulsionGate(xs[k][kStateSpeed]) *
           (rp->weight_obstacle / (clearance + kClearanceOffset) +
            rp->weight_anchor * (p - anchor).squaredNorm());
    }
    const StateVector& xh = xs.back();
    j += rp->weight_speed *
         (xh[kStateSpeed] * xh[kStateSpeed] +
          xh[kStateTurnRate] * xh[kStateTurnRate]);
    return j;
  }

  // Adjoint sweep: lambda_k = dJ/dx_k accumulated backward through the Euler
  // transition x_{k+1} = x_k + dt f(x_k, u_k).
  ControlSeq Gradient(const std::vector<StateVector>& xs,
                      const ControlSeq& u) const {
    const int h = static_cast<int>(u.rows());
    ControlSeq g(h, 2);
    StateVector lambda = StateVector::Zero();
    for (int k = h; k >= 1; --k) {
      StateVector stage = StateVector::Zero();
      const Vector2d p(xs[k][kStateX], xs[k][kStateY]);
      const PointDistance pd = PointPolygonDistanceGrad(p, *obstacle);
      const double denom = pd.distance + kClearanceOffset;
      const double gate = RepulsionGate(xs[k][kStateSpeed]);
      const Vector2d dpos =
          gate * (-rp->weight_obstacle / (denom * denom) * pd.d_point +
                  2.0 * rp->weight_anchor * (p - anchor));
      stage[kStateX] = dpos.x();
      stage[kStateY] = dpos.y();
      stage[kStateSpeed] +=
          RepulsionGateDv(xs[k][kStateSpeed]) *
          (rp->weight_obstacle / denom +
           rp->weight_anchor * (p - anchor).squaredNorm());
      if (k == h) {
        stage[kStateSpeed] += 2.0 * rp->weight_speed * xs[k][kStateSpeed];
        stage[kStateTurnRate] +=
            2.0 * rp->weight_speed * xs[k][kStateTurnRate];
      }
      lambda += stage;
      // dJ/du_{k-1} through x_k; the control enters as dt * B.
      g(k - 1, 0) = rp->dt * lambda[kStateSpeed];
      g(k - 1, 1) = rp->dt * lambda[kStateTurnRate];
      if (k > 1) {
        Eigen::Matrix<double, 5, 5> a;
        Eigen::Matrix<double, 5, 2> b;
        DerivativeJacobians(xs[k - 1], &a, &b);
        const StateVector propagated = a.transpose() * lambda;
        lambda += rp->dt * propagated;
      }
    }
    return g;
  }
};

// Pure-braking ramp: decelerate each speed toward zero at the bound. A good
// deterministic start for the projected gradient.
ControlSeq BrakingInit(const StateVector& x0, const ReactParams& rp,
                       const ModelParams& model) {
  ControlSeq u(rp.horizon, 2);
  double v = x0[kStateSpeed];
  double w = x0[kStateTurnRate];
  for (int k = 0; k < rp.horizon; ++k) {
    const double a = std::clamp(-v / rp.dt, -model.a_max, model.a_max);
    const double al = std::clamp(-w / rp.dt, -model.alpha_max, model.alpha_max);
    u(k, 0) = a;
    u(k, 1) = al;
    v += rp.dt * a;
    w += rp.dt * al;
  }
  return u;
}

}  // namespace

void ReactParams::Validate() const {
  if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  if (weight_obstacle < 0.0 || weight_anchor < 0.0 || weight_speed < 0.0) {
    throw std::invalid_argument("gains must be nonnegative");
  }
  if (rest_threshold <= 0.0 || time_cap <= 0.0) {
    throw std::invalid_argument("rest threshold and time cap must be positive");
  }
}

ReactStepResult ReactStep(const RobotState& x, const RobotState& anchor,
                          const ConvexPolygon& obstacle, const ReactParams& rp,
                          const ModelParams& model) {
  const Objective obj{&obstacle, anchor.position, &rp};
  const StateVector x0 = x.ToVector();

  ControlSeq u = ProjectToBox(BrakingInit(x0, rp, model), model);
  auto xs = obj.Rollout(x0, u);
  double cost = obj.Cost(xs);
  ControlSeq grad = obj.Gradient(xs, u);

  const auto braking_fallback = [&] {
    ReactStepResult r;
    r.control.linear_accel =
        x.linear_speed > 0 ? -model.a_max : (x.linear_speed < 0 ? model.a_max : 0.0);
    r.control.angular_accel =
        x.angular_speed > 0 ? -model.alpha_max
                            : (x.angular_speed < 0 ? model.alpha_max : 0.0);
    r.fallback = true;
    return r;
  };
  if (!std::isfinite(cost) || !grad.allFinite()) return braking_fallback();

  double step = 1.0 / std::max(1.0, grad.norm());
  ControlSeq u_prev = u;
  ControlSeq g_prev = grad;
  for (int it = 0; it < kMaxPgIterations; ++it) {
    // Stationarity: no movement under a unit projected step.
    const double stationarity =
        (u - ProjectToBox(u - grad, model)).lpNorm<Eigen::Infinity>();
    if (stationarity < 1e-8) break;

    double t = step;
    ControlSeq candidate = u;
    double candidate_cost = cost;
    bool improved = false;
    for (int bt = 0; bt < 30; ++bt) {
      candidate = ProjectToBox(u - t * grad, model);
      const auto cxs = obj.Rollout(x0, candidate);
      candidate_cost = obj.Cost(cxs);
      if (!std::isfinite(candidate_cost)) return braking_fallback();
      const double decrease =
          grad.cwiseProduct(u - candidate).sum();  // first-order model
      if (candidate_cost <= cost - 1e-4 * decrease + 1e-15) {
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;

    u_prev = u;
    g_prev = grad;
    u = candidate;
    xs = obj.Rollout(x0, u);
    cost = candidate_cost;
    grad = obj.Gradient(xs, u);
    if (!grad.allFinite()) return braking_fallback();

    // Barzilai-Borwein step for the next iteration.
    const ControlSeq du = u - u_prev;
    const ControlSeq dg = grad - g_prev;
    const double denom = dg.cwiseProduct(dg).sum();
    if (denom > 1e-18) {
      step = std::abs(du.cwiseProduct(dg).sum()) / denom;
      step = std::clamp(step, 1e-6, 1e3);
    }
  }

  ReactStepResult r;
  r.control.linear_accel = std::clamp(u(0, 0), -model.a_max, model.a_max);
  r.control.angular_accel =
      std::clamp(u(0, 1), -model.alpha_max, model.alpha_max);
  return r;
}

ManeuverResult RunManeuver(const RobotState& x0, const ConvexPolygon& obstacle,
                           const ReactParams& rp, const ModelParams& model,
                           double sub_dt) {
  rp.Validate();
  model.Validate();
  if (sub_dt <= 0.0) throw std::invalid_argument("sub_dt must be positive");

  ManeuverResult result;
  result.path.push_back(x0);
  RobotState x = x0;
  double t = 0.0;
  const int n_sub = std::max(1, static_cast<int>(std::round(rp.dt / sub_dt)));
  const double dt_sub = rp.dt / n_sub;

  while (SpeedNorm(x) >= rp.rest_threshold) {
    if (t >= rp.time_cap) {
      throw ManeuverError("reactive maneuver did not reach rest within cap");
    }
    const ReactStepResult step = ReactStep(x, x0, obstacle, rp, model);
    result.used_fallback |= step.fallback;
    for (int s = 0; s < n_sub; ++s) {
      x = Integrate(x, step.control, dt_sub, model);
      result.path.push_back(x);
      result.controls.push_back(step.control);
      t += dt_sub;
      if (SpeedNorm(x) < rp.rest_threshold) break;
    }
  }

  // Brake the residual speed off exactly; the linear speed dynamics make the
  // proportional control land on zero in one step when within bounds.
  while (SpeedNorm(x) >= kRestFinal) {
    if (t >= rp.time_cap + 1.0) {
      throw ManeuverError("residual braking did not converge");
    }
    ControlInput u;
    u.linear_accel =
        std::clamp(-x.linear_speed / dt_sub, -model.a_max, model.a_max);
    u.angular_accel =
        std::clamp(-x.angular_speed / dt_sub, -model.alpha_max,
                   model.alpha_max);
    x = Integrate(x, u, dt_sub, model);
    result.path.push_back(x);
    result.controls.push_back(u);
    t += dt_sub;
  }
  result.duration = t;
  return result;
}

}  // namespace reactive_horizon
