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

#include "reactive_horizon/planner.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>

#include "reactive_horizon/occupancy_grid.h"

namespace reactive_horizon {
namespace {

constexpr int kStateDim = 5;
constexpr int kControlDim = 2;
constexpr double kMinDuration = 0.2;   // s, lower bound on t_f
constexpr double kMaxDuration = 60.0;  // s

// Weight on the control-effort tie-breaker in the objective. A pure
// minimum-time objective leaves the controls indeterminate along arcs where
// an active state constraint, not actuation, limits progress; the discrete
// solutions then chatter and the solver grinds in the flat subspace. The
// quadratic term makes the problem well posed at a duration cost well below
// the tolerances anything downstream compares against.
constexpr double kControlEffortWeight = 1e-3;

// The field of view is an isosceles triangle, so containment of a reactive
// set decomposes into three per-face rows. Separate rows keep the constraint
// surface smooth; a min-aggregated margin kinks whenever the tight face
// changes, which stalls the quasi-Newton solver at corner-rounding arcs.
constexpr int kFovFaces = 3;

// Visibility rows for K nodes at the given lag: the per-node family plus the
// bridging family against the previous witness cone, one row per FOV face.
int VisibilityRowCount(int num_nodes, int lag) {
  return kFovFaces * (2 * (num_nodes - lag) - 1);
}

// Everything the constraint callbacks capture. Copied out of the problem so
// the transcription does not dangle off the caller's belief map.
struct TranscriptionContext {
  int num_nodes = 0;
  int lag = 0;
  bool secure = true;
  std::vector<ConvexPolygon> obstacles;
  ModelParams model;
  ReactiveSetModel reactive;
  SensorParams sensor;
  PlanMargins margins;
  StateVector start = StateVector::Zero();
  Vector2d goal = Vector2d::Zero();
};

RobotState StateAt(const Eigen::VectorXd& z, int i) {
  return RobotState::FromVector(z.segment<kStateDim>(kStateDim * i));
}

// The reactive model rejects speeds outside its calibrated range. Iterates
// stay inside the variable box, which Validate() keeps within that range,
// but interpolants and externally supplied states may overshoot slightly.
RobotState ClampToReactiveRange(RobotState s, const ReactiveSetModel& rm) {
  s.linear_speed = std::clamp(s.linear_speed, -rm.v_max, rm.v_max);
  s.angular_speed = std::clamp(s.angular_speed, -rm.omega_max, rm.omega_max);
  return s;
}

// Chain rule from margin derivatives in ellipsoid parameters to the 5 state
// components, through the reactive set jet.
Eigen::Matrix<double, 5, 1> ComposeStateGrad(const ReactiveSetJet& jet,
                                             const MarginDerivatives& g) {
  Eigen::Matrix<double, 5, 1> out = jet.d_center.transpose() * g.d_center;
  out(kStateHeading) += (g.d_shape.array() * jet.d_shape_theta.array()).sum();
  out(kStateSpeed) += (g.d_shape.array() * jet.d_shape_v.array()).sum();
  out(kStateTurnRate) += (g.d_shape.array() * jet.d_shape_omega.array()).sum();
  return out;
}

void EvalConstraints(const TranscriptionContext& ctx, const Eigen::VectorXd& z,
                     Eigen::VectorXd* c, Eigen::MatrixXd* jac) {
  const int K = ctx.num_nodes;
  const int n = 7 * K + 1;
  const int num_obs = static_cast<int>(ctx.obstacles.size());
  const int defect_rows = kStateDim * (K - 1);
  const int boundary_rows = kStateDim + 2;
  const int obstacle_rows = K * num_obs;
  const int visibility_rows =
      ctx.secure ? VisibilityRowCount(K, ctx.lag) : 0;
  const int m = defect_rows + boundary_rows + obstacle_rows + visibility_rows;
  const int control_base = kStateDim * K;
  const int tf_col = 7 * K;

  c->resize(m);
  if (jac != nullptr) {
    jac->resize(m, n);
    jac->setZero();
  }

  const double t_f = z(tf_col);
  const double h = t_f / static_cast<double>(K - 1);

  std::vector<StateVector> f(K);
  std::vector<Eigen::Matrix<double, 5, 5>> df_dx(jac ? K : 0);
  std::vector<Eigen::Matrix<double, 5, 2>> df_du(jac ? K : 0);
  for (int i = 0; i < K; ++i) {
    const StateVector xi = z.segment<kStateDim>(kStateDim * i);
    const ControlVector ui = z.segment<kControlDim>(control_base + 2 * i);
    f[i] = Derivative(xi, ui);
    if (jac != nullptr) DerivativeJacobians(xi, &df_dx[i], &df_du[i]);
  }

  int row = 0;
  const Eigen::Matrix<double, 5, 5> eye =
      Eigen::Matrix<double, 5, 5>::Identity();
  for (int i = 0; i + 1 < K; ++i) {
    const StateVector xi = z.segment<kStateDim>(kStateDim * i);
    const StateVector xj = z.segment<kStateDim>(kStateDim * (i + 1));
    c->segment<kStateDim>(row) =
        xj - xi - 0.5 * h * (f[i] + f[i + 1]);
    if (jac != nullptr) {
      jac->block<5, 5>(row, kStateDim * i) = -eye - 0.5 * h * df_dx[i];
      jac->block<5, 5>(row, kStateDim * (i + 1)) =
          eye - 0.5 * h * df_dx[i + 1];
      jac->block<5, 2>(row, control_base + 2 * i) = -0.5 * h * df_du[i];
      jac->block<5, 2>(row, control_base + 2 * (i + 1)) =
          -0.5 * h * df_du[i + 1];
      jac->block<5, 1>(row, tf_col) =
          -(f[i] + f[i + 1]) / (2.0 * static_cast<double>(K - 1));
    }
    row += kStateDim;
  }

  c->segment<kStateDim>(row) = z.segment<kStateDim>(0) - ctx.start;
  if (jac != nullptr) jac->block<5, 5>(row, 0) = eye;
  row += kStateDim;
  const int last = kStateDim * (K - 1);
  (*c)(row) = z(last + kStateX) - ctx.goal.x();
  (*c)(row + 1) = z(last + kStateY) - ctx.goal.y();
  if (jac != nullptr) {
    (*jac)(row, last + kStateX) = 1.0;
    (*jac)(row + 1, last + kStateY) = 1.0;
  }
  row += 2;

  // Reactive set evaluations are shared between the obstacle and visibility
  // rows. The jet is only needed when the Jacobian is requested.
  std::vector<ReactiveSetJet> jets;
  std::vector<Ellipsoid> sets;
  if (ctx.secure && (num_obs > 0 || visibility_rows > 0)) {
    if (jac != nullptr) {
      jets.resize(K);
      for (int i = 0; i < K; ++i) {
        jets[i] = EvaluateReactiveSetJet(
            ctx.reactive, ClampToReactiveRange(StateAt(z, i), ctx.reactive));
      }
    } else {
      sets.resize(K);
      for (int i = 0; i < K; ++i) {
        sets[i] = EvaluateReactiveSet(
            ctx.reactive, ClampToReactiveRange(StateAt(z, i), ctx.reactive));
      }
    }
  }
  const auto set_at = [&](int i) -> const Ellipsoid& {
    return jac != nullptr ? jets[i].ellipsoid : sets[i];
  };

  if (ctx.secure) {
    // Clearance floor in units of the set's minor axis: the separation value
    // is dimensionless in the unit-ball frame, and the floor radius is a
    // lower bound on every semi-axis, so sep >= clearance / floor implies a
    // metric clearance of at least margins.obstacle_clearance.
    const double sep_floor =
        ctx.margins.obstacle_clearance / ctx.reactive.floor_radius;
    for (int i = 0; i < K; ++i) {
      for (int k = 0; k < num_obs; ++k) {
        if (jac != nullptr) {
          const SeparationMargin sm =
              EllipsoidPolygonSeparationGrad(set_at(i), ctx.obstacles[k]);
          (*c)(row) = sm.margin - sep_floor;
          jac->block<1, 5>(row, kStateDim * i) =
              ComposeStateGrad(jets[i], sm.grad).transpose();
        } else {
          (*c)(row) =
              EllipsoidPolygonSeparation(set_at(i), ctx.obstacles[k]) -
              sep_floor;
        }
        ++row;
      }
    }
  } else {
    for (int i = 0; i < K; ++i) {
      const Vector2d p(z(kStateDim * i + kStateX), z(kStateDim * i + kStateY));
      for (int k = 0; k < num_obs; ++k) {
        if (jac != nullptr) {
          const PointDistance pd =
              PointPolygonDistanceGrad(p, ctx.obstacles[k]);
          (*c)(row) = pd.distance - ctx.margins.obstacle_clearance;
          (*jac)(row, kStateDim * i + kStateX) = pd.d_point.x();
          (*jac)(row, kStateDim * i + kStateY) = pd.d_point.y();
        } else {
          (*c)(row) = PointPolygonDistance(p, ctx.obstacles[k]) -
                      ctx.margins.obstacle_clearance;
        }
        ++row;
      }
    }
  }

  if (ctx.secure) {
    // Per-node family (node i in the cone of i - lag), then the bridging
    // family (node i in the cone of i - lag - 1). Each pair contributes one
    // row per FOV face.
    const auto emit_visibility = [&](int i, int j) {
      const RobotState xj = StateAt(z, j);
      const ConvexPolygon fov = FovPolygon(xj, ctx.sensor);
      for (int face = 0; face < kFovFaces; ++face) {
        if (jac != nullptr) {
          const InPolygonMargin im =
              EllipsoidInPolygonFaceMarginGrad(set_at(i), fov, face, xj.position);
          (*c)(row) = im.margin - ctx.margins.visibility;
          jac->block<1, 5>(row, kStateDim * i) +=
              ComposeStateGrad(jets[i], im.grad).transpose();
          // The witness cone translates with node j's position and rotates
          // with its heading about that position.
          (*jac)(row, kStateDim * j + kStateX) += im.grad.d_poly_pose(0);
          (*jac)(row, kStateDim * j + kStateY) += im.grad.d_poly_pose(1);
          (*jac)(row, kStateDim * j + kStateHeading) += im.grad.d_poly_pose(2);
        } else {
          (*c)(row) = EllipsoidInPolygonFaceMargin(set_at(i), fov, face) -
                      ctx.margins.visibility;
        }
        ++row;
      }
    };
    for (int i = ctx.lag; i < K; ++i) emit_visibility(i, i - ctx.lag);
    for (int i = ctx.lag + 1; i < K; ++i) emit_visibility(i, i - ctx.lag - 1);
  }
}

Transcription BuildTranscription(const PlanProblem& p, bool secure) {
  if (p.lag < 0) {
    throw std::invalid_argument(
        "transcription needs a concrete node lag; resolve lag before "
        "transcribing");
  }
  auto ctx = std::make_shared<TranscriptionContext>();
  ctx->num_nodes = p.num_nodes;
  ctx->lag = p.lag;
  ctx->secure = secure;
  ctx->obstacles = p.belief->known_obstacles();
  ctx->model = p.model;
  ctx->reactive = p.reactive;
  ctx->sensor = p.sensor;
  ctx->margins = p.margins;
  ctx->start = p.start.ToVector();
  ctx->goal = p.goal;

  const int K = p.num_nodes;
  const int n = 7 * K + 1;
  Transcription t;
  t.num_nodes = K;
  t.lag = p.lag;
  t.defect_rows = kStateDim * (K - 1);
  t.boundary_rows = kStateDim + 2;
  t.obstacle_rows = K * static_cast<int>(ctx->obstacles.size());
  t.visibility_rows = secure ? VisibilityRowCount(K, p.lag) : 0;

  t.nlp.num_variables = n;
  t.nlp.num_equalities = t.defect_rows + t.boundary_rows;
  t.nlp.num_inequalities = t.obstacle_rows + t.visibility_rows;

  const OccupancyGrid& world = p.belief->observed_free();
  const Vector2d lo = world.min_corner();
  const Vector2d hi = world.max_corner();
  Eigen::VectorXd lower(n), upper(n);
  for (int i = 0; i < K; ++i) {
    const int s = kStateDim * i;
    lower(s + kStateX) = lo.x();
    upper(s + kStateX) = hi.x();
    lower(s + kStateY) = lo.y();
    upper(s + kStateY) = hi.y();
    lower(s + kStateHeading) = -kBoxQpInfinity;
    upper(s + kStateHeading) = kBoxQpInfinity;
    lower(s + kStateSpeed) = -p.model.v_max;
    upper(s + kStateSpeed) = p.model.v_max;
    lower(s + kStateTurnRate) = -p.model.omega_max;
    upper(s + kStateTurnRate) = p.model.omega_max;
    const int u = 7 * K - 2 * K + 2 * i;  // control_base + 2 i
    lower(u) = -p.model.a_max;
    upper(u) = p.model.a_max;
    lower(u + 1) = -p.model.alpha_max;
    upper(u + 1) = p.model.alpha_max;
  }
  // Terminal speed cap; heading and turn rate stay free.
  const double cap = std::min(p.goal_speed_cap, p.model.v_max);
  lower(kStateDim * (K - 1) + kStateSpeed) = -cap;
  upper(kStateDim * (K - 1) + kStateSpeed) = cap;
  lower(7 * K) = kMinDuration;
  upper(7 * K) = kMaxDuration;
  t.nlp.lower = std::move(lower);
  t.nlp.upper = std::move(upper);

  const int tf_col = 7 * K;
  const int control_base = kStateDim * K;
  t.nlp.objective = [tf_col, control_base](const Eigen::VectorXd& z,
                                           Eigen::VectorXd* grad) -> double {
    const auto u = z.segment(control_base, tf_col - control_base);
    if (grad != nullptr) {
      grad->setZero(z.size());
      (*grad)(tf_col) = 1.0;
      grad->segment(control_base, u.size()) = 2.0 * kControlEffortWeight * u;
    }
    return z(tf_col) + kControlEffortWeight * u.squaredNorm();
  };
  t.nlp.constraints = [ctx](const Eigen::VectorXd& z, Eigen::VectorXd* c,
                            Eigen::MatrixXd* jac) {
    EvalConstraints(*ctx, z, c, jac);
  };
  return t;
}

// Debug aid: central-difference Jacobians in place of the analytic ones.
NlpProblem WithFdJacobians(const NlpProblem& nlp) {
  NlpProblem out = nlp;
  const auto base = nlp.constraints;
  const int n = nlp.num_variables;
  out.constraints = [base, n](const Eigen::VectorXd& z, Eigen::VectorXd* c,
                              Eigen::MatrixXd* jac) {
    base(z, c, nullptr);
    if (jac == nullptr) return;
    const double step = 1e-6;
    jac->resize(c->size(), n);
    Eigen::VectorXd zp = z, cp, cm;
    for (int col = 0; col < n; ++col) {
      zp(col) = z(col) + step;
      base(zp, &cp, nullptr);
      zp(col) = z(col) - step;
      base(zp, &cm, nullptr);
      zp(col) = z(col);
      jac->col(col) = (cp - cm) / (2.0 * step);
    }
  };
  return out;
}

bool SegmentTraversable(const OccupancyGrid& grid, const Vector2d& a,
                        const Vector2d& b) {
  const double len = (b - a).norm();
  const int steps =
      std::max(1, static_cast<int>(std::ceil(len / (0.5 * grid.cell_size()))));
  for (int s = 0; s <= steps; ++s) {
    const Vector2d pt = a + (b - a) * (static_cast<double>(s) / steps);
    int ix = 0, iy = 0;
    if (!grid.CellOf(pt, &ix, &iy) || !grid.Get(ix, iy)) return false;
  }
  return true;
}

// Greedy line-of-sight shortcut over the grid path; removes the staircase
// texture of 8-connected A* so headings in the guess are smooth.
std::vector<Vector2d> ShortcutPath(const std::vector<Vector2d>& pts,
                                   const OccupancyGrid& grid) {
  if (pts.size() <= 2) return pts;
  std::vector<Vector2d> out;
  out.push_back(pts.front());
  std::size_t a = 0;
  while (a + 1 < pts.size()) {
    std::size_t best = a + 1;
    for (std::size_t b = pts.size() - 1; b > a + 1; --b) {
      if (SegmentTraversable(grid, pts[a], pts[b])) {
        best = b;
        break;
      }
    }
    out.push_back(pts[best]);
    a = best;
  }
  return out;
}

struct ArcPath {
  std::vector<Vector2d> points;
  std::vector<double> cum_length;  // same size, cum_length[0] = 0
  double total = 0.0;

  Vector2d PositionAt(double s) const {
    s = std::clamp(s, 0.0, total);
    std::size_t k = 1;
    while (k + 1 < points.size() && cum_length[k] < s) ++k;
    const double seg = cum_length[k] - cum_length[k - 1];
    const double a = seg > 1e-12 ? (s - cum_length[k - 1]) / seg : 0.0;
    return points[k - 1] + a * (points[k] - points[k - 1]);
  }
  double HeadingAt(double s) const {
    s = std::clamp(s, 0.0, total);
    std::size_t k = 1;
    while (k + 1 < points.size() && cum_length[k] <= s) ++k;
    const Vector2d d = points[k] - points[k - 1];
    return std::atan2(d.y(), d.x());
  }
};

ArcPath MakeArcPath(const std::vector<Vector2d>& pts) {
  ArcPath ap;
  ap.points = pts;
  ap.cum_length.resize(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k) {
    ap.cum_length[k] =
        ap.cum_length[k - 1] + (pts[k] - pts[k - 1]).norm();
  }
  ap.total = ap.cum_length.back();
  return ap;
}

// Continuous heading sequence: each value is the wrap-equivalent closest to
// its predecessor.
double UnwrapNear(double prev, double raw) {
  double a = raw;
  while (a - prev > M_PI) a -= 2.0 * M_PI;
  while (a - prev < -M_PI) a += 2.0 * M_PI;
  return a;
}

NlpSolution RestInPlaceGuess(const PlanProblem& p) {
  NlpSolution g;
  const int K = p.num_nodes;
  g.states.assign(K, p.start);
  g.controls.assign(K, ControlInput{});
  g.t_f = 0.5;
  for (int i = 0; i < K; ++i) {
    const double w = 1.0 - static_cast<double>(i) / (K - 1);
    g.states[i].linear_speed = p.start.linear_speed * w;
    g.states[i].angular_speed = p.start.angular_speed * w;
    if (i + 1 < K) {
      g.controls[i].linear_accel =
          std::clamp(-p.start.linear_speed / g.t_f, -p.model.a_max,
                     p.model.a_max);
      g.controls[i].angular_accel =
          std::clamp(-p.start.angular_speed / g.t_f, -p.model.alpha_max,
                     p.model.alpha_max);
    }
  }
  return g;
}

NlpSolution ResampleWarm(const NlpSolution& warm, int K) {
  NlpSolution g;
  g.t_f = std::max(warm.t_f, kMinDuration);
  g.lag = warm.lag;
  const int Kw = static_cast<int>(warm.states.size());
  g.states.resize(K);
  g.controls.resize(K);
  for (int i = 0; i < K; ++i) {
    const double pos =
        static_cast<double>(i) * (Kw - 1) / static_cast<double>(K - 1);
    const int k = std::min(Kw - 2, static_cast<int>(std::floor(pos)));
    const double a = std::clamp(pos - k, 0.0, 1.0);
    const StateVector xs = (1.0 - a) * warm.states[k].ToVector() +
                           a * warm.states[k + 1].ToVector();
    const ControlVector us = (1.0 - a) * warm.controls[k].ToVector() +
                             a * warm.controls[k + 1].ToVector();
    g.states[i] = RobotState::FromVector(xs);
    g.controls[i] = ControlInput::FromVector(us);
  }
  return g;
}

int ResolveLag(const PlanProblem& p, double guess_t_f) {
  if (p.lag >= 0) return p.lag;
  const double h = guess_t_f / static_cast<double>(p.num_nodes - 1);
  const int lag = static_cast<int>(std::llround(p.sensing_lag / h));
  return std::clamp(lag, 1, p.num_nodes / 2);
}

NlpSolution PlanImpl(const PlanProblem& p, const SolverParams& sp,
                     const NlpSolution* warm, bool secure) {
  p.Validate();
  const NlpSolution guess = MakeInitialGuess(p, warm);
  PlanProblem q = p;
  q.lag = ResolveLag(p, guess.t_f);

  const Transcription t =
      secure ? TranscribeSecure(q) : TranscribeBaseline(q);
  const NlpProblem nlp = sp.fd_gradients ? WithFdJacobians(t.nlp) : t.nlp;
  const NlpResult res = SolveSqp(nlp, PackTrajectory(guess), sp.sqp);

  NlpSolution sol = UnpackTrajectory(res.x, p.num_nodes);
  sol.status = res.status;
  sol.kkt_residual = res.kkt_residual;
  sol.constraint_violation = res.constraint_violation;
  sol.iterations = res.iterations;
  sol.lag = q.lag;
  return sol;
}

// Hermite basis on [0, 1].
StateVector HermiteState(const StateVector& x0, const StateVector& f0,
                         const StateVector& x1, const StateVector& f1,
                         double tau, double h) {
  const double t2 = tau * tau, t3 = t2 * tau;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + tau;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * x0 + h10 * h * f0 + h01 * x1 + h11 * h * f1;
}

}  // namespace

void PlanMargins::Validate() const {
  if (!(obstacle_clearance > 0.0)) {
    throw std::invalid_argument("obstacle_clearance must be positive");
  }
  if (!(visibility > 0.0)) {
    throw std::invalid_argument("visibility margin must be positive");
  }
}

void PlanProblem::Validate() const {
  model.Validate();
  sensor.Validate();
  margins.Validate();
  if (num_nodes < 2) throw std::invalid_argument("num_nodes must be >= 2");
  if (lag < -1) throw std::invalid_argument("lag must be -1, 0, or positive");
  if (lag >= 1 && num_nodes < 2 * lag) {
    throw std::invalid_argument("num_nodes must be >= 2 * lag");
  }
  if (!(sensing_lag > 0.0)) {
    throw std::invalid_argument("sensing_lag must be positive");
  }
  if (!(goal_speed_cap >= 0.0)) {
    throw std::invalid_argument("goal_speed_cap must be >= 0");
  }
  if (belief == nullptr) throw std::invalid_argument("belief must be set");
  if (model.v_max > reactive.v_max + 1e-9 ||
      model.omega_max > reactive.omega_max + 1e-9) {
    throw std::invalid_argument(
        "model speed limits exceed the reactive model's calibrated range");
  }
  const OccupancyGrid& world = belief->observed_free();
  const Vector2d lo = world.min_corner();
  const Vector2d hi = world.max_corner();
  const auto in_world = [&](const Vector2d& p) {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() &&
           p.y() <= hi.y();
  };
  if (!in_world(start.position) || !in_world(goal)) {
    throw PlannerError("start or goal outside the world rectangle");
  }
  for (const ConvexPolygon& obs : belief->known_obstacles()) {
    if (PointPolygonDistance(start.position, obs) < reactive.floor_radius) {
      throw PlannerError("start is inside or touching a known obstacle");
    }
    if (PointPolygonDistance(goal, obs) < reactive.floor_radius) {
      throw PlannerError("goal is inside or touching a known obstacle");
    }
  }
}

Transcription TranscribeSecure(const PlanProblem& p) {
  p.Validate();
  return BuildTranscription(p, /*secure=*/true);
}

Transcription TranscribeBaseline(const PlanProblem& p) {
  p.Validate();
  PlanProblem q = p;
  if (q.lag < 0) q.lag = 1;  // unused by the baseline rows, kept for audit
  return BuildTranscription(q, /*secure=*/false);
}

Eigen::VectorXd PackTrajectory(const NlpSolution& traj) {
  const int K = static_cast<int>(traj.states.size());
  Eigen::VectorXd z(7 * K + 1);
  for (int i = 0; i < K; ++i) {
    z.segment<kStateDim>(kStateDim * i) = traj.states[i].ToVector();
    z.segment<kControlDim>(kStateDim * K + 2 * i) =
        traj.controls[i].ToVector();
  }
  z(7 * K) = traj.t_f;
  return z;
}

NlpSolution UnpackTrajectory(const Eigen::VectorXd& z, int num_nodes) {
  NlpSolution out;
  out.states.resize(num_nodes);
  out.controls.resize(num_nodes);
  for (int i = 0; i < num_nodes; ++i) {
    out.states[i] =
        RobotState::FromVector(z.segment<kStateDim>(kStateDim * i));
    out.controls[i] = ControlInput::FromVector(
        z.segment<kControlDim>(kStateDim * num_nodes + 2 * i));
  }
  out.t_f = z(7 * num_nodes);
  return out;
}

NlpSolution MakeInitialGuess(const PlanProblem& p, const NlpSolution* warm) {
  p.Validate();
  const int K = p.num_nodes;
  if (warm != nullptr && !warm->states.empty()) {
    if (static_cast<int>(warm->states.size()) == K) return *warm;
    return ResampleWarm(*warm, K);
  }

  const OccupancyGrid& world = p.belief->observed_free();
  OccupancyGrid traversable(world.min_corner(), world.max_corner(),
                            world.cell_size());
  traversable.Fill(true);
  for (const ConvexPolygon& obs : p.belief->known_obstacles()) {
    MarkPolygon(&traversable, obs, p.reactive.floor_radius, false);
  }
  std::vector<Vector2d> cells =
      PlanGridPath(traversable, p.start.position, p.goal);
  if (cells.empty()) {
    throw PlannerError("no grid path between start and goal in believed-free space");
  }
  std::vector<Vector2d> path = ShortcutPath(cells, traversable);
  path.front() = p.start.position;
  path.back() = p.goal;

  const ArcPath arc = MakeArcPath(path);
  if (arc.total < 1e-6) return RestInPlaceGuess(p);

  // Trapezoidal speed profile over arc length at half the speed limit,
  // matching the start speed and the terminal cap.
  const double cruise = 0.5 * p.model.v_max;
  const double v0 = std::min(std::abs(p.start.linear_speed), p.model.v_max);
  const double ve = std::min(p.goal_speed_cap, cruise);
  const double a = p.model.a_max;
  const auto profile = [&](double s) {
    const double accel = std::sqrt(v0 * v0 + 2.0 * a * s);
    const double decel = std::sqrt(ve * ve + 2.0 * a * (arc.total - s));
    return std::min({cruise, accel, decel});
  };

  // Exact segment times under constant acceleration between samples.
  const int fine = 4000;
  std::vector<double> time_at(fine + 1, 0.0);
  const double ds = arc.total / fine;
  for (int k = 1; k <= fine; ++k) {
    const double va = profile(ds * (k - 1));
    const double vb = profile(ds * k);
    time_at[k] = time_at[k - 1] +
                 (va + vb > 1e-9 ? 2.0 * ds / (va + vb) : 0.0);
  }
  const double t_f = std::max(time_at.back(), kMinDuration);

  NlpSolution g;
  g.t_f = t_f;
  g.states.resize(K);
  g.controls.resize(K);
  const double h = t_f / (K - 1);
  int cursor = 0;
  double prev_heading = p.start.heading;
  for (int i = 0; i < K; ++i) {
    const double t = h * i;
    while (cursor < fine && time_at[cursor + 1] < t) ++cursor;
    double s;
    if (cursor >= fine) {
      s = arc.total;
    } else {
      const double span = time_at[cursor + 1] - time_at[cursor];
      const double a01 = span > 1e-12 ? (t - time_at[cursor]) / span : 0.0;
      s = ds * (cursor + std::clamp(a01, 0.0, 1.0));
    }
    RobotState& st = g.states[i];
    st.position = arc.PositionAt(s);
    st.heading = UnwrapNear(prev_heading, arc.HeadingAt(s));
    prev_heading = st.heading;
    st.linear_speed = profile(s);
    st.angular_speed = 0.0;
  }
  for (int i = 0; i + 1 < K; ++i) {
    g.states[i].angular_speed = std::clamp(
        (g.states[i + 1].heading - g.states[i].heading) / h,
        -p.model.omega_max, p.model.omega_max);
  }
  g.states[0] = p.start;
  g.states[0].heading = UnwrapNear(g.states[1].heading, p.start.heading);
  for (int i = 0; i + 1 < K; ++i) {
    g.controls[i].linear_accel = std::clamp(
        (g.states[i + 1].linear_speed - g.states[i].linear_speed) / h,
        -p.model.a_max, p.model.a_max);
    g.controls[i].angular_accel = std::clamp(
        (g.states[i + 1].angular_speed - g.states[i].angular_speed) / h,
        -p.model.alpha_max, p.model.alpha_max);
  }
  return g;
}

NlpSolution Plan(const PlanProblem& p, const SolverParams& sp,
                 const NlpSolution* warm) {
  return PlanImpl(p, sp, warm, /*secure=*/true);
}

NlpSolution PlanBaseline(const PlanProblem& p, const SolverParams& sp,
                         const NlpSolution* warm) {
  return PlanImpl(p, sp, warm, /*secure=*/false);
}

MinpReport VerifyMinpConstraint(const NlpSolution& sol,
                                const PlanProblem& p) {
  MinpReport rep;
  const int K = static_cast<int>(sol.states.size());
  rep.passed = true;
  if (K <= 1) return rep;

  std::vector<ConvexPolygon> fovs;
  fovs.reserve(K);
  for (int j = 0; j < K; ++j) {
    fovs.push_back(FovPolygon(sol.states[j], p.sensor));
  }
  const int scope_start = std::max(1, sol.lag);
  for (int i = 1; i < K; ++i) {
    const Ellipsoid e = EvaluateReactiveSet(
        p.reactive, ClampToReactiveRange(sol.states[i], p.reactive));
    MinpNodeReport node;
    node.node = i;
    double best = -std::numeric_limits<double>::infinity();
    for (int j = i - 1; j >= 0; --j) {
      const double m = EllipsoidInPolygonMargin(e, fovs[j]);
      best = std::max(best, m);
      if (m >= 0.0) {
        node.witness = j;
        node.margin = m;
        break;
      }
    }
    if (node.witness < 0) {
      node.margin = best;
      if (i >= scope_start) {
        if (rep.passed) rep.first_failure = i;
        rep.passed = false;
      }
    }
    rep.nodes.push_back(node);
  }
  return rep;
}

DiscretizationReport CheckDiscretization(const NlpSolution& sol,
                                         const PlanProblem& p,
                                         int dense_factor) {
  DiscretizationReport rep;
  const int K = static_cast<int>(sol.states.size());
  if (K < 2 || dense_factor < 1 || sol.t_f <= 0.0) return rep;

  const double h = sol.t_f / (K - 1);
  std::vector<StateVector> f(K);
  for (int i = 0; i < K; ++i) {
    f[i] = Derivative(sol.states[i].ToVector(), sol.controls[i].ToVector());
  }
  std::vector<ConvexPolygon> fovs;
  fovs.reserve(K);
  for (int j = 0; j < K; ++j) {
    fovs.push_back(FovPolygon(sol.states[j], p.sensor));
  }

  const int samples = dense_factor * K;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const double t = sol.t_f * static_cast<double>(s) / (samples - 1);
    // Witness prescribed by the corollary: the node with the largest node
    // time <= t - lag * h. Samples earlier than the lag window have no
    // prescribed witness and are skipped.
    const int j = static_cast<int>(
        std::floor((t - sol.lag * h) / h + 1e-9));
    if (j < 0) continue;
    const int jw = std::min(j, K - 1);
    const int k =
        std::min(K - 2, static_cast<int>(std::floor(t / h + 1e-9)));
    const double tau = std::clamp(t / h - k, 0.0, 1.0);
    const StateVector xs =
        HermiteState(sol.states[k].ToVector(), f[k],
                     sol.states[k + 1].ToVector(), f[k + 1], tau, h);
    const RobotState xd =
        ClampToReactiveRange(RobotState::FromVector(xs), p.reactive);
    const double m =
        EllipsoidInPolygonMargin(EvaluateReactiveSet(p.reactive, xd),
                                 fovs[jw]);
    rep.times.push_back(t);
    rep.witnesses.push_back(jw);
    rep.margins.push_back(m);
    if (m < rep.min_margin) {
      rep.min_margin = m;
      rep.time_at_min = t;
    }
  }
  if (rep.margins.empty()) {
    rep.min_margin = 0.0;
    rep.passed = false;
  } else {
    rep.passed = rep.min_margin > 0.0;
  }
  return rep;
}

std::vector<RobotState> RolloutSolution(const NlpSolution& sol,
                                        const ModelParams& model,
                                        int substeps) {
  std::vector<RobotState> out;
  const int K = static_cast<int>(sol.states.size());
  if (K == 0) return out;
  out.push_back(sol.states[0]);
  if (K < 2 || substeps < 1) return out;
  const double h = sol.NodeInterval();
  RobotState x = sol.states[0];
  for (int i = 0; i + 1 < K; ++i) {
    const ControlVector u0 = sol.controls[i].ToVector();
    const ControlVector u1 = sol.controls[i + 1].ToVector();
    for (int q = 0; q < substeps; ++q) {
      const double mid = (q + 0.5) / substeps;
      const ControlInput u =
          ControlInput::FromVector((1.0 - mid) * u0 + mid * u1);
      x = Integrate(x, u, h / substeps, model);
      out.push_back(x);
    }
  }
  return out;
}

NlpSolution SolutionTail(const NlpSolution& sol, double tau) {
  const int K = static_cast<int>(sol.states.size());
  if (K < 2 || sol.t_f <= 0.0) return sol;
  tau = std::clamp(tau, 0.0, sol.t_f);

  const auto sample = [&](double t, StateVector* xs, ControlVector* us) {
    t = std::clamp(t, 0.0, sol.t_f);
    const double pos = t / sol.t_f * (K - 1);
    const int k = std::min(K - 2, static_cast<int>(std::floor(pos)));
    const double a = std::clamp(pos - k, 0.0, 1.0);
    *xs = (1.0 - a) * sol.states[k].ToVector() +
          a * sol.states[k + 1].ToVector();
    *us = (1.0 - a) * sol.controls[k].ToVector() +
          a * sol.controls[k + 1].ToVector();
  };

  NlpSolution out = sol;
  out.t_f = std::max(sol.t_f - tau, kMinDuration);
  for (int i = 0; i < K; ++i) {
    // Sampling past t_f holds the final node, which pads short tails.
    const double t = tau + out.t_f * static_cast<double>(i) / (K - 1);
    StateVector xs;
    ControlVector us;
    sample(t, &xs, &us);
    out.states[i] = RobotState::FromVector(xs);
    out.controls[i] = ControlInput::FromVector(us);
  }
  return out;
}

}  // namespace reactive_horizon
