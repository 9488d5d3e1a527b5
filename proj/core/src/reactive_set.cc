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

#include "reactive_horizon/reactive_set.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

namespace reactive_horizon {
namespace {

using Eigen::Matrix2d;
using Eigen::Vector2d;
using BasisVec = Eigen::Matrix<double, ReactiveSetModel::kBasisSize, 1>;

// Padding cross added to every path cloud so the enclosing-ellipse problem is
// well posed even for point or collinear clouds (rest states, pure braking).
// Half a millimeter, far below the floor radius.
constexpr double kCloudPad = 5e-4;

constexpr double kRangeTol = 1e-9;

// Wall sizing for the calibration family.
constexpr double kWallHalfLength = 1.0;
constexpr double kWallHalfWidth = 0.05;

// Distances of the two wall rings, as near_offset + scale * stop(v). Scaled
// with the stopping distance so the walls provoke evasion at every speed
// instead of sitting beyond reach at low speed.
constexpr double kWallStopScale = 1.35;
constexpr double kWallNearOffset = 0.25;
constexpr double kWallFarOffset = 0.85;

struct GridPointData {
  double v = 0.0;
  double omega = 0.0;
  std::vector<Vector2d> cloud;  // body-frame positions, padded
  Ellipsoid raw_mvee;
  Vector2d center_target = Vector2d::Zero();
  Vector2d semi_target = Vector2d::Zero();
  int path_points = 0;
};

// Smallest axis-aligned ellipse (same center) that contains a possibly tilted
// one: start from the support extents per axis and scale by the spectral norm
// of the normalized shape.
void AxisAlignedCover(const Ellipsoid& e, Vector2d* semi) {
  Vector2d w(e.shape.row(0).norm(), e.shape.row(1).norm());
  w = w.cwiseMax(1e-9);
  const Matrix2d normalized = w.cwiseInverse().asDiagonal() * e.shape;
  const double kappa = normalized.jacobiSvd().singularValues()(0);
  *semi = kappa * w;
}

GridPointData ProcessGridPoint(double v, double omega, const CalibrationParams& params) {
  GridPointData data;
  data.v = v;
  data.omega = omega;

  RobotState x0;
  x0.position = Vector2d::Zero();
  x0.heading = 0.0;
  x0.linear_speed = v;
  x0.angular_speed = omega;

  const std::vector<ConvexPolygon> family = CalibrationWallFamily(v, params);
  const std::vector<ManeuverResult> maneuvers = SimulateReactivePaths(x0, family, params);

  for (const ManeuverResult& m : maneuvers) {
    for (const RobotState& s : m.path) {
      data.cloud.push_back(s.position);
    }
  }
  data.path_points = static_cast<int>(data.cloud.size());

  // Pad around the cloud centroid; keeps the cover well posed when every
  // maneuver stays at the origin.
  Vector2d centroid = Vector2d::Zero();
  for (const Vector2d& p : data.cloud) centroid += p;
  if (!data.cloud.empty()) centroid /= static_cast<double>(data.cloud.size());
  data.cloud.push_back(centroid + Vector2d(kCloudPad, 0.0));
  data.cloud.push_back(centroid - Vector2d(kCloudPad, 0.0));
  data.cloud.push_back(centroid + Vector2d(0.0, kCloudPad));
  data.cloud.push_back(centroid - Vector2d(0.0, kCloudPad));

  data.raw_mvee = MinimumEnclosingEllipsoid(data.cloud);
  data.center_target = data.raw_mvee.center;
  AxisAlignedCover(data.raw_mvee, &data.semi_target);
  return data;
}

// Nonnegative least squares by the Lawson-Hanson active-set method. With the
// constant-free basis, nonnegative coefficients make the fitted surface
// nonnegative and non-decreasing in v and |omega| by construction, which is
// what keeps the squared-semi-axis model from dipping through zero between
// grid points.
Eigen::VectorXd SolveNnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.cols());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * a.norm() * (b.norm() + 1.0);
  for (int outer = 0; outer < 10 * n; ++outer) {
    const Eigen::VectorXd w = a.transpose() * (b - a * c);
    int best = -1;
    double best_w = tol;
    for (int i = 0; i < n; ++i) {
      if (!passive[i] && w(i) > best_w) {
        best_w = w(i);
        best = i;
      }
    }
    if (best < 0) break;
    passive[best] = true;

    for (int inner = 0; inner < 10 * n; ++inner) {
      std::vector<int> idx;
      for (int i = 0; i < n; ++i) {
        if (passive[i]) idx.push_back(i);
      }
      Eigen::MatrixXd ap(a.rows(), idx.size());
      for (size_t j = 0; j < idx.size(); ++j) ap.col(j) = a.col(idx[j]);
      const Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);

      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      for (size_t j = 0; j < idx.size(); ++j) z(idx[j]) = zp(j);
      if (zp.minCoeff() > 0.0) {
        c = z;
        break;
      }
      double alpha = 1.0;
      for (const int i : idx) {
        if (z(i) <= 0.0) alpha = std::min(alpha, c(i) / (c(i) - z(i)));
      }
      c += alpha * (z - c);
      for (const int i : idx) {
        if (c(i) <= 1e-14) {
          c(i) = 0.0;
          passive[i] = false;
        }
      }
    }
  }
  return c;
}

// Worst containment violation, in meters, of the grid clouds against the
// model scaled by `scale` on its fitted semi-axes (floor kept fixed).
double WorstViolation(const std::vector<GridPointData>& grid,
                      const Eigen::Matrix<double, 2, ReactiveSetModel::kBasisSize>& offset_coeffs,
                      const Eigen::Matrix<double, 2, ReactiveSetModel::kBasisSize>& shape_coeffs,
                      double floor_radius, double scale, std::vector<double>* per_point) {
  double worst = -std::numeric_limits<double>::infinity();
  if (per_point != nullptr) per_point->assign(grid.size(), 0.0);
  for (size_t g = 0; g < grid.size(); ++g) {
    const BasisVec b = ReactiveSetModel::Basis(grid[g].v, grid[g].omega);
    const Vector2d a = offset_coeffs * b;
    const Vector2d q = (shape_coeffs * b).cwiseMax(0.0);
    const Vector2d semi =
        (Vector2d::Constant(floor_radius * floor_radius) + scale * scale * q).cwiseSqrt();
    double local = -std::numeric_limits<double>::infinity();
    for (const Vector2d& p : grid[g].cloud) {
      const Vector2d z = (p - a).cwiseQuotient(semi);
      local = std::max(local, (z.norm() - 1.0) * semi.minCoeff());
    }
    if (per_point != nullptr) (*per_point)[g] = local;
    worst = std::max(worst, local);
  }
  return worst;
}

}  // namespace

BasisVec ReactiveSetModel::Basis(double v, double omega) {
  const double w2 = omega * omega;
  BasisVec b;
  b << v, v * v, w2, v * w2, v * v * w2;
  return b;
}

BasisVec ReactiveSetModel::BasisDv(double v, double omega) {
  const double w2 = omega * omega;
  BasisVec b;
  b << 1.0, 2.0 * v, 0.0, w2, 2.0 * v * w2;
  return b;
}

BasisVec ReactiveSetModel::BasisDomega(double v, double omega) {
  BasisVec b;
  b << 0.0, 0.0, 2.0 * omega, 2.0 * v * omega, 2.0 * v * v * omega;
  return b;
}

Vector2d ReactiveSetModel::OffsetAt(double v, double omega) const {
  const double sign = v < 0.0 ? -1.0 : 1.0;
  Vector2d a = offset_coeffs * Basis(std::abs(v), omega);
  a.x() *= sign;
  return a;
}

Vector2d ReactiveSetModel::SemiAxesAt(double v, double omega) const {
  const Vector2d q = (shape_coeffs * Basis(std::abs(v), omega)).cwiseMax(0.0);
  return (Vector2d::Constant(floor_radius * floor_radius) + inflation * inflation * q)
      .cwiseSqrt();
}

void CalibrationParams::Validate() const {
  model.Validate();
  react.Validate();
  if (speed_samples < 2 || turn_samples < 2) {
    throw std::invalid_argument("calibration grid needs at least 2 samples per axis");
  }
  if (wall_bearings < 4) {
    throw std::invalid_argument("calibration needs at least 4 wall bearings");
  }
  if (floor_radius <= 0.0) throw std::invalid_argument("floor_radius must be positive");
  if (inflation < 1.0) throw std::invalid_argument("inflation must be >= 1");
  if (sub_dt <= 0.0) throw std::invalid_argument("sub_dt must be positive");
}

std::vector<ConvexPolygon> CalibrationWallFamily(double v, const CalibrationParams& params) {
  const double stop = v * v / (2.0 * params.model.a_max);
  const double near_d = kWallStopScale * stop + kWallNearOffset;
  const double far_d = kWallStopScale * stop + kWallFarOffset;

  std::vector<ConvexPolygon> family;
  family.reserve(2 * params.wall_bearings);
  for (int k = 0; k < params.wall_bearings; ++k) {
    const double bearing = 2.0 * std::numbers::pi * k / params.wall_bearings;
    const Vector2d dir(std::cos(bearing), std::sin(bearing));
    for (const double d : {near_d, far_d}) {
      family.push_back(ConvexPolygon::OrientedBox(
          d * dir, kWallHalfLength, kWallHalfWidth, bearing + std::numbers::pi / 2.0));
    }
  }
  return family;
}

std::vector<ManeuverResult> SimulateReactivePaths(const RobotState& x0,
                                                  const std::vector<ConvexPolygon>& family,
                                                  const CalibrationParams& params) {
  params.Validate();
  std::vector<ManeuverResult> out;
  out.reserve(family.size());
  for (size_t k = 0; k < family.size(); ++k) {
    ManeuverResult m;
    try {
      m = RunManeuver(x0, family[k], params.react, params.model, params.sub_dt);
    } catch (const ManeuverError& err) {
      std::ostringstream msg;
      msg << "calibration failed: obstacle " << k << ": " << err.what();
      throw ReactiveSetError(msg.str());
    }
    for (size_t i = 0; i < m.path.size(); ++i) {
      const Vector2d p = m.path[i].position;
      bool hit = family[k].Contains(p);
      if (!hit && i + 1 < m.path.size()) {
        hit = SegmentIntersectsPolygon(p, m.path[i + 1].position, family[k]);
      }
      if (hit) {
        std::ostringstream msg;
        msg << "calibration failed: maneuver " << k << " collides with its obstacle";
        throw ReactiveSetError(msg.str());
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

ReactiveSetModel CalibrateReactiveSet(const CalibrationParams& params,
                                      CalibrationReport* report) {
  params.Validate();

  std::vector<std::pair<double, double>> grid_points;
  for (int i = 0; i < params.speed_samples; ++i) {
    const double v = params.model.v_max * i / (params.speed_samples - 1);
    for (int j = 0; j < params.turn_samples; ++j) {
      const double omega =
          params.model.omega_max * (2.0 * j / (params.turn_samples - 1) - 1.0);
      grid_points.emplace_back(v, omega);
    }
  }

  // Grid points are independent; each owns its controller rollouts.
  std::vector<std::future<GridPointData>> futures;
  futures.reserve(grid_points.size());
  for (const auto& [v, omega] : grid_points) {
    futures.push_back(std::async(std::launch::async, ProcessGridPoint, v, omega,
                                 std::cref(params)));
  }
  std::vector<GridPointData> grid;
  grid.reserve(grid_points.size());
  for (auto& f : futures) grid.push_back(f.get());

  // Least squares over the basis, separately per output row. No constant
  // term, so targets at rest are matched exactly by construction.
  const int n = static_cast<int>(grid.size());
  Eigen::MatrixXd design(n, ReactiveSetModel::kBasisSize);
  Eigen::MatrixXd center_rhs(n, 2);
  Eigen::MatrixXd q_rhs(n, 2);
  const double floor2 = params.floor_radius * params.floor_radius;
  for (int g = 0; g < n; ++g) {
    design.row(g) = ReactiveSetModel::Basis(grid[g].v, grid[g].omega).transpose();
    center_rhs.row(g) = grid[g].center_target.transpose();
    const Vector2d q_target =
        (grid[g].semi_target.cwiseProduct(grid[g].semi_target) - Vector2d::Constant(floor2))
            .cwiseMax(0.0);
    q_rhs.row(g) = q_target.transpose();
  }
  ReactiveSetModel model;
  model.offset_coeffs = design.colPivHouseholderQr().solve(center_rhs).transpose();
  // Shape rows are constrained to nonnegative coefficients so the fitted
  // squared semi-axes stay nonnegative and monotone between grid points.
  model.shape_coeffs.row(0) = SolveNnls(design, q_rhs.col(0)).transpose();
  model.shape_coeffs.row(1) = SolveNnls(design, q_rhs.col(1)).transpose();
  model.floor_radius = params.floor_radius;
  model.inflation = params.inflation;
  model.v_max = params.model.v_max;
  model.omega_max = params.model.omega_max;

  // Fit quality: rms gap between predicted and measured semi-axes, relative
  // to the mean measured semi-axis.
  double rss = 0.0;
  double semi_sum = 0.0;
  for (int g = 0; g < n; ++g) {
    const Vector2d q =
        (model.shape_coeffs * ReactiveSetModel::Basis(grid[g].v, grid[g].omega)).cwiseMax(0.0);
    const Vector2d predicted = (Vector2d::Constant(floor2) + q).cwiseSqrt();
    rss += (predicted - grid[g].semi_target).squaredNorm();
    semi_sum += grid[g].semi_target.sum();
  }
  const double mean_semi = semi_sum / (2.0 * n);
  const double residual_ratio = std::sqrt(rss / (2.0 * n)) / std::max(mean_semi, 1e-12);
  if (residual_ratio > 0.5) {
    std::ostringstream msg;
    msg << "calibration failed: fit residual ratio " << residual_ratio
        << " exceeds 0.5; the polynomial basis cannot represent this controller";
    throw ReactiveSetError(msg.str());
  }

  // Exact containment correction: smallest semi-axis multiplier that puts
  // every raw path point inside its grid ellipse. The configured inflation is
  // applied on top, so the final model holds every point with strict margin.
  double scale = 1.0;
  if (WorstViolation(grid, model.offset_coeffs, model.shape_coeffs, params.floor_radius,
                     scale, nullptr) > 0.0) {
    double lo = 1.0;
    double hi = 2.0;
    while (WorstViolation(grid, model.offset_coeffs, model.shape_coeffs, params.floor_radius,
                          hi, nullptr) > 0.0) {
      hi *= 2.0;
      if (hi > 64.0) {
        throw ReactiveSetError(
            "calibration failed: no bounded containment correction; fitted axes "
            "collapse somewhere on the grid");
      }
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (WorstViolation(grid, model.offset_coeffs, model.shape_coeffs, params.floor_radius,
                         mid, nullptr) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    scale = hi;
    model.shape_coeffs *= scale * scale;
  }

  if (report != nullptr) {
    report->samples.clear();
    report->samples.reserve(grid.size());
    std::vector<double> per_point;
    report->max_violation =
        WorstViolation(grid, model.offset_coeffs, model.shape_coeffs, params.floor_radius,
                       params.inflation, &per_point);
    for (size_t g = 0; g < grid.size(); ++g) {
      CalibrationSample s;
      s.v = grid[g].v;
      s.omega = grid[g].omega;
      s.raw_mvee = grid[g].raw_mvee;
      s.center_target = grid[g].center_target;
      s.semi_target = grid[g].semi_target;
      s.path_points = grid[g].path_points;
      s.max_violation = per_point[g];
      report->samples.push_back(std::move(s));
    }
    report->fit_residual_ratio = residual_ratio;
    report->containment_scale = scale;
  }
  return model;
}

Ellipsoid EvaluateReactiveSet(const ReactiveSetModel& model, const RobotState& x) {
  if (std::abs(x.linear_speed) > model.v_max + kRangeTol ||
      std::abs(x.angular_speed) > model.omega_max + kRangeTol) {
    std::ostringstream msg;
    msg << "reactive set queried outside calibrated range: v=" << x.linear_speed
        << " omega=" << x.angular_speed << " (range " << model.v_max << ", "
        << model.omega_max << ")";
    throw ReactiveSetError(msg.str());
  }
  const Matrix2d rot = Eigen::Rotation2Dd(x.heading).toRotationMatrix();
  Ellipsoid e;
  e.center = x.position + rot * model.OffsetAt(x.linear_speed, x.angular_speed);
  e.shape = rot * model.SemiAxesAt(x.linear_speed, x.angular_speed).asDiagonal();
  return e;
}

ReactiveSetJet EvaluateReactiveSetJet(const ReactiveSetModel& model, const RobotState& x) {
  ReactiveSetJet jet;
  jet.ellipsoid = EvaluateReactiveSet(model, x);

  const double sign = x.linear_speed < 0.0 ? -1.0 : 1.0;
  const double va = std::abs(x.linear_speed);
  const double omega = x.angular_speed;
  const BasisVec b = ReactiveSetModel::Basis(va, omega);
  const BasisVec bv = ReactiveSetModel::BasisDv(va, omega);
  const BasisVec bw = ReactiveSetModel::BasisDomega(va, omega);

  const Matrix2d rot = Eigen::Rotation2Dd(x.heading).toRotationMatrix();
  Matrix2d drot;  // d(rot)/d(theta)
  drot << -rot(1, 0), -rot(0, 0), rot(0, 0), -rot(1, 0);

  Vector2d a = model.offset_coeffs * b;
  a.x() *= sign;
  // a = (s * ax(|v|), ay(|v|)); the sign cancels in d(ax)/dv and survives in
  // d(ay)/dv, and symmetrically for the omega partial of ax.
  const Vector2d da_raw = model.offset_coeffs * bv;
  const Vector2d da_dv(da_raw.x(), sign * da_raw.y());
  Vector2d da_domega = model.offset_coeffs * bw;
  da_domega.x() *= sign;

  jet.d_center.setZero();
  jet.d_center.block<2, 2>(0, 0).setIdentity();
  jet.d_center.col(kStateHeading) = drot * a;
  jet.d_center.col(kStateSpeed) = rot * da_dv;
  jet.d_center.col(kStateTurnRate) = rot * da_domega;

  const Vector2d q_raw = model.shape_coeffs * b;
  const Vector2d q = q_raw.cwiseMax(0.0);
  const double infl2 = model.inflation * model.inflation;
  const Vector2d semi =
      (Vector2d::Constant(model.floor_radius * model.floor_radius) + infl2 * q).cwiseSqrt();
  const Vector2d dq_dv = model.shape_coeffs * bv;
  const Vector2d dq_domega = model.shape_coeffs * bw;
  Vector2d dsemi_dv = Vector2d::Zero();
  Vector2d dsemi_domega = Vector2d::Zero();
  for (int m = 0; m < 2; ++m) {
    if (q_raw(m) > 0.0) {
      dsemi_dv(m) = sign * infl2 * dq_dv(m) / (2.0 * semi(m));
      dsemi_domega(m) = infl2 * dq_domega(m) / (2.0 * semi(m));
    }
  }

  jet.d_shape_theta = drot * semi.asDiagonal();
  jet.d_shape_v = rot * dsemi_dv.asDiagonal();
  jet.d_shape_omega = rot * dsemi_domega.asDiagonal();
  return jet;
}

}  // namespace reactive_horizon
