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

#ifndef REACTIVE_HORIZON_REACTIVE_SET_H_
#define REACTIVE_HORIZON_REACTIVE_SET_H_

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reactive_horizon/dynamics.h"
#include "reactive_horizon/geometry.h"
#include "reactive_horizon/reactive_controller.h"

namespace reactive_horizon {

// Calibration or evaluation of the reactive set failed in a way the caller
// cannot recover from (controller never reached rest, fit residual too large,
// state outside the calibrated range).
class ReactiveSetError : public std::runtime_error {
 public:
  explicit ReactiveSetError(const std::string& what) : std::runtime_error(what) {}
};

// Polynomial model of the reactive set: an ellipse, axis aligned in the body
// frame of the query state, whose center offset and squared semi-axes are
// polynomials in (v, omega). Basis, in order:
//   { v, v^2, omega^2, v*omega^2, v^2*omega^2 }
// Degree <= 2 in v, even in omega, and no constant term so the model collapses
// to the floor ellipse at rest. Negative speeds are handled by symmetry: the
// query uses |v| and mirrors the forward offset.
struct ReactiveSetModel {
  static constexpr int kBasisSize = 5;

  // Rows are (a_x, a_y): body-frame center offset in meters.
  Eigen::Matrix<double, 2, kBasisSize> offset_coeffs =
      Eigen::Matrix<double, 2, kBasisSize>::Zero();
  // Rows are (q_1, q_2): squared semi-axes in m^2, before floor and inflation.
  // The containment correction found during calibration is already folded in.
  Eigen::Matrix<double, 2, kBasisSize> shape_coeffs =
      Eigen::Matrix<double, 2, kBasisSize>::Zero();

  double floor_radius = 0.05;  // rest ellipse radius, m
  double inflation = 1.1;      // safety multiplier on the fitted semi-axes
  // Calibrated range; evaluation outside it is an extrapolation error.
  double v_max = 2.0;
  double omega_max = 2.0;

  // Basis vector and its partials at (v, omega). v is the raw (signed) speed;
  // callers that need the symmetry reduction apply it before calling.
  static Eigen::Matrix<double, kBasisSize, 1> Basis(double v, double omega);
  static Eigen::Matrix<double, kBasisSize, 1> BasisDv(double v, double omega);
  static Eigen::Matrix<double, kBasisSize, 1> BasisDomega(double v, double omega);

  // Body-frame center offset at signed speed v. Uses |v| and mirrors a_x.
  Eigen::Vector2d OffsetAt(double v, double omega) const;
  // Final semi-axes at signed speed v, floor and inflation included.
  Eigen::Vector2d SemiAxesAt(double v, double omega) const;
};

// One calibration grid point and its audit data.
struct CalibrationSample {
  double v = 0.0;
  double omega = 0.0;
  // Minimum-volume ellipse of the raw body-frame path cloud (may be tilted).
  Ellipsoid raw_mvee;
  // Axis-aligned targets handed to the least-squares fit.
  Eigen::Vector2d center_target = Eigen::Vector2d::Zero();
  Eigen::Vector2d semi_target = Eigen::Vector2d::Zero();
  int path_points = 0;
  // Worst containment violation of the raw points against the final model,
  // in meters; <= 0 means every point is inside.
  double max_violation = 0.0;
};

struct CalibrationReport {
  std::vector<CalibrationSample> samples;
  double max_violation = 0.0;      // max over samples, m
  double fit_residual_ratio = 0.0; // rms semi-axis residual / mean semi-axis
  double containment_scale = 1.0;  // multiplier folded into shape_coeffs
};

struct CalibrationParams {
  int speed_samples = 5;  // grid over [0, v_max]
  int turn_samples = 5;   // grid over [-omega_max, omega_max]
  int wall_bearings = 16; // obstacle family directions per grid point
  double floor_radius = 0.05;
  double inflation = 1.1;
  double sub_dt = 0.02;   // maneuver sampling step
  ModelParams model;
  ReactParams react;

  void Validate() const;
};

// Builds the calibration obstacle family for a state with speed v: thin walls
// at wall_bearings body-frame directions, each at two distances scaled with
// the 1D stopping distance so they actually provoke evasion.
std::vector<ConvexPolygon> CalibrationWallFamily(double v, const CalibrationParams& params);

// Runs the reactive controller against each obstacle in the family and returns
// the resulting maneuvers. Paths start at x0 and end at rest; a maneuver that
// collides with its triggering obstacle or never reaches rest raises
// ReactiveSetError.
std::vector<ManeuverResult> SimulateReactivePaths(const RobotState& x0,
                                                  const std::vector<ConvexPolygon>& family,
                                                  const CalibrationParams& params);

// Fits a ReactiveSetModel over the (v, omega) grid. Throws ReactiveSetError if
// any maneuver fails, the fit residual exceeds half the mean semi-axis, or no
// bounded containment correction exists.
ReactiveSetModel CalibrateReactiveSet(const CalibrationParams& params,
                                      CalibrationReport* report = nullptr);

// World-frame reactive set at a state. Throws ReactiveSetError when |v| or
// |omega| leave the calibrated range.
Ellipsoid EvaluateReactiveSet(const ReactiveSetModel& model, const RobotState& x);

// Reactive set plus derivatives with respect to the planning state
// (px, py, theta, v, omega). The shape derivative with respect to px, py is
// zero and omitted. Not smooth at v = 0 or where a fitted squared semi-axis
// crosses zero; both sit outside the region the planner exercises.
struct ReactiveSetJet {
  Ellipsoid ellipsoid;
  Eigen::Matrix<double, 2, 5> d_center = Eigen::Matrix<double, 2, 5>::Zero();
  Eigen::Matrix2d d_shape_theta = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d d_shape_v = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d d_shape_omega = Eigen::Matrix2d::Zero();
};

ReactiveSetJet EvaluateReactiveSetJet(const ReactiveSetModel& model, const RobotState& x);

}  // namespace reactive_horizon

#endif  // REACTIVE_HORIZON_REACTIVE_SET_H_
