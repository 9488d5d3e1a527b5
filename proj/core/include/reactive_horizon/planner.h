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

#ifndef REACTIVE_HORIZON_PLANNER_H_
#define REACTIVE_HORIZON_PLANNER_H_

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "reactive_horizon/dynamics.h"
#include "reactive_horizon/geometry.h"
#include "reactive_horizon/nlp.h"
#include "reactive_horizon/reactive_set.h"
#include "reactive_horizon/sensor.h"

namespace reactive_horizon {

// Thrown when a planning problem is inconsistent (endpoint inside a known
// obstacle) or no coarse path exists in the believed-free space.
class PlannerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Margins the trajectory constraints must clear, all in meters.
struct PlanMargins {
  // Clearance floor between the robot and known obstacles. The secure
  // transcription enforces it on the whole reactive ellipsoid, in units of
  // the set's minor axis (see TranscribeSecure); the baseline enforces it on
  // the point robot directly.
  double obstacle_clearance = 0.01;

  // Slack on every visibility containment row. Covers the second-order sag
  // of the containment margin between nodes; see TranscribeSecure for why
  // first-order sag is handled structurally instead of by this margin.
  double visibility = 0.015;

  // Throws std::invalid_argument unless both margins are positive.
  void Validate() const;
};

// A trajectory optimization problem over the current belief.
struct PlanProblem {
  RobotState start;
  Vector2d goal = Vector2d::Zero();
  // Terminal speed: |v| at the final node is bounded by this (0 = full rest).
  // Terminal heading and turn rate are free.
  double goal_speed_cap = 0.0;

  int num_nodes = 40;  // K

  // Node-index visibility lag. -1 derives it from sensing_lag at the initial
  // guess's duration, re-fixed (not re-optimized) per solve. 0 is the
  // degenerate self-visibility mode (each node against its own view cone);
  // planning problems use lag >= 1 with num_nodes >= 2 * lag.
  int lag = -1;
  double sensing_lag = 0.5;  // s, used only when lag == -1

  ModelParams model;
  ReactiveSetModel reactive;
  SensorParams sensor;
  PlanMargins margins;

  // Not owned; must outlive the problem. Known obstacles are copied into the
  // transcription, world bounds become position bounds.
  const BeliefMap* belief = nullptr;

  // Throws std::invalid_argument on bad parameters and PlannerError when the
  // problem is inconsistent (endpoint out of bounds or inside an obstacle,
  // speed limits beyond the reactive model's calibrated range).
  void Validate() const;
};

// Solver knobs. Tolerances and iteration caps live in the embedded SQP
// parameters; convergence is declared only when the constraint violation is
// within feas_tol and the KKT residual within kkt_tol.
// SQP settings sized for collocation problems (a few hundred variables).
// The quadratic subproblem tolerances are looser than the library defaults;
// the outer loop verifies feasibility and stationarity itself, so certifying
// every subproblem to high accuracy buys nothing.
inline SqpParams PlannerSqpDefaults() {
  SqpParams sp;
  sp.qp.eps_abs = 1e-6;
  sp.qp.eps_rel = 1e-6;
  return sp;
}

struct SolverParams {
  SqpParams sqp = PlannerSqpDefaults();
  // Replaces analytic constraint Jacobians with central differences. A debug
  // aid for isolating gradient bugs; roughly 2n times slower.
  bool fd_gradients = false;
};

// A discretized trajectory, solved or serving as an initial guess. Headings
// are continuous (unwrapped) along the node sequence rather than reduced to
// (-pi, pi], so interpolation across nodes is well defined.
struct NlpSolution {
  std::vector<RobotState> states;      // K entries
  std::vector<ControlInput> controls;  // K entries, matched to the nodes
  double t_f = 0.0;                    // s
  SolveStatus status = SolveStatus::kMaxIterations;
  double kkt_residual = 0.0;
  double constraint_violation = 0.0;
  int lag = 0;  // node-index lag the transcription used
  int iterations = 0;

  double NodeInterval() const {
    return states.size() > 1 ? t_f / static_cast<double>(states.size() - 1)
                             : 0.0;
  }
  double NodeTime(int i) const { return NodeInterval() * i; }
};

// The assembled constraint system: box bounds on the stacked variable vector
// [x_0..x_{K-1}, u_0..u_{K-1}, t_f], defect and boundary equalities first,
// then margin inequalities, all with analytic gradients. Row order is
// [defects | boundary | obstacle margins | visibility margins]; obstacle
// rows are node-major. The callbacks own copies of everything they touch, so
// the transcription outlives the problem's belief pointer.
struct Transcription {
  NlpProblem nlp;
  int num_nodes = 0;
  int lag = 0;

  int defect_rows = 0;
  int boundary_rows = 0;
  int obstacle_rows = 0;
  int visibility_rows = 0;

  int StateOffset(int i) const { return 5 * i; }
  int ControlOffset(int i) const { return 5 * num_nodes + 2 * i; }
  int TimeOffset() const { return 7 * num_nodes; }
};

// Secure transcription: minimum-time objective, trapezoidal defects with
// h = t_f / (K - 1) and t_f a bounded decision variable, full-state start
// and positional goal equalities, control and speed limits as variable
// bounds. For every node the reactive ellipsoid must keep a dimensionless
// separation of obstacle_clearance / floor_radius from each known obstacle
// (the clearance floor expressed in minor-axis units). Visibility comes in
// two row families, both at the PlanMargins.visibility slack: node i's
// ellipsoid inside the view cone of node i - lag (i >= lag), and inside the
// cone of node i - lag - 1 (i >= lag + 1). The second, bridging family pins
// containment between nodes: the dense audit freezes one witness cone per
// node interval, the bridging row puts the interval's far endpoint in that
// same cone, and the margin is concave along an interval up to O(h^2) path
// curvature, so interior dips are second order and a small constant slack
// absorbs them. A lone per-node family would instead need a slack of about
// v * h, which exceeds what the first lag window of a rest start can clear.
// Containment in the triangular view cone is posed per face, so visibility
// rows total 3 * (2 * (K - lag) - 1). Requires p.lag >= 0.
Transcription TranscribeSecure(const PlanProblem& p);

// Identical program minus the visibility rows, with the obstacle margin
// applied to the point robot: point_polygon_distance >= obstacle_clearance.
Transcription TranscribeBaseline(const PlanProblem& p);

// Packs a trajectory into the stacked variable vector and back. Unpack does
// not wrap headings.
Eigen::VectorXd PackTrajectory(const NlpSolution& traj);
NlpSolution UnpackTrajectory(const Eigen::VectorXd& z, int num_nodes);

// Builds an initial guess. With a warm solution, resamples it onto
// p.num_nodes (a same-size warm start is copied verbatim). Otherwise runs a
// grid shortest path over the belief's world rectangle with known obstacles
// inflated by the reactive floor radius, shortcuts it, and time-parameterizes
// at half the speed limit with a trapezoidal profile. Throws PlannerError
// when no grid path exists.
NlpSolution MakeInitialGuess(const PlanProblem& p,
                             const NlpSolution* warm = nullptr);

// Solves the secure program from the guess (cold or warm). The returned
// status is kConverged only when constraint_violation <= feas_tol and
// kkt_residual <= kkt_tol; max-iteration and infeasible results still carry
// the best iterate for diagnostics. Deterministic for identical inputs.
NlpSolution Plan(const PlanProblem& p, const SolverParams& sp = {},
                 const NlpSolution* warm = nullptr);

// Solves the baseline program (no visibility constraint, point-robot
// obstacle clearance). The solution's lag field is still filled so the
// verification oracles can scope their verdicts identically.
NlpSolution PlanBaseline(const PlanProblem& p, const SolverParams& sp = {},
                         const NlpSolution* warm = nullptr);

// One node's result from the containment witness search.
struct MinpNodeReport {
  int node = 0;
  int witness = -1;      // witnessing node index, -1 when none exists
  double margin = 0.0;   // witness margin, or the best over all candidates
};

// Witness search report. The per-node list covers every node i >= 1; the
// verdict quantifies over the nodes the fixed-lag transcription constrains
// (i >= lag, or i >= 1 in self-visibility mode): a plan's first lag window
// is covered by the executed history in closed loop, not by the plan, and a
// standalone trajectory cannot clear its own starting apex there.
struct MinpReport {
  std::vector<MinpNodeReport> nodes;
  bool passed = false;
  int first_failure = -1;  // node index, -1 when passed
};

// For each node i >= 1, searches candidate witnesses j < i (latest first)
// for a view cone containing node i's reactive set. Any fixed-lag-feasible
// solution passes: j = i - lag is a witness by construction. A single-node
// trajectory passes vacuously.
MinpReport VerifyMinpConstraint(const NlpSolution& sol, const PlanProblem& p);

// Dense containment audit of a solved trajectory.
struct DiscretizationReport {
  std::vector<double> times;     // s
  std::vector<int> witnesses;    // node index prescribed per sample
  std::vector<double> margins;   // m
  double min_margin = 0.0;
  double time_at_min = 0.0;
  bool passed = false;  // min_margin > 0
};

// Interpolates the solution with cubic Hermite states at dense_factor * K
// uniform samples and, at each time t with a defined witness (the node with
// the largest node time <= t - lag * h), measures the reactive set's
// containment margin in that node's view cone. A negative minimum is
// reported, not thrown: it flags an under-resolved discretization. With
// dense_factor = 1 the samples are exactly the nodes and the margins
// reproduce the transcription's own visibility values.
DiscretizationReport CheckDiscretization(const NlpSolution& sol,
                                         const PlanProblem& p,
                                         int dense_factor);

// Integrates the solution controls open loop, `substeps` RK4 steps per node
// interval with the control interpolated linearly between nodes. Returns the
// chain of intermediate states starting at the first node; used to audit
// collocation error against geometric margins.
std::vector<RobotState> RolloutSolution(const NlpSolution& sol,
                                        const ModelParams& model,
                                        int substeps);

// Remainder of the solution from time tau onward, linearly resampled onto
// the same node count. Used to warm start replans mid flight. tau is clamped
// to [0, t_f]; a tail shorter than 0.2 s is padded to that duration.
NlpSolution SolutionTail(const NlpSolution& sol, double tau);

}  // namespace reactive_horizon

#endif  // REACTIVE_HORIZON_PLANNER_H_
