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

#ifndef REACTIVE_HORIZON_NLP_H_
#define REACTIVE_HORIZON_NLP_H_

#include <functional>

#include <Eigen/Dense>

namespace reactive_horizon {

// Convex QP with two-sided linear constraints and implicit box handling:
//   minimize    1/2 d'Pd + q'd
//   subject to  l <= Ad <= u
// Rows with l == u act as equalities. Box bounds on d are passed as extra
// identity rows by the caller. Solved by ADMM over Ruiz-equilibrated data;
// deterministic for fixed inputs.
struct BoxQp {
  Eigen::MatrixXd p;  // n x n, symmetric positive semidefinite
  Eigen::VectorXd q;  // n
  Eigen::MatrixXd a;  // m x n
  Eigen::VectorXd l;  // m, -kBoxQpInfinity for free
  Eigen::VectorXd u;  // m, +kBoxQpInfinity for free
  Eigen::VectorXd warm_y;  // optional row-dual seed, sized m or empty
};

inline constexpr double kBoxQpInfinity = 1e20;

struct BoxQpParams {
  double rho = 0.1;           // base step for inequality rows
  double eq_rho_scale = 1e3;  // equality rows get rho * this
  double sigma = 1e-6;        // proximal regularization
  double relaxation = 1.6;
  int max_iterations = 4000;
  double eps_abs = 1e-8;
  double eps_rel = 1e-8;
};

struct BoxQpResult {
  Eigen::VectorXd d;  // primal solution
  Eigen::VectorXd y;  // row duals, OSQP sign convention (>= 0 at upper bound)
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

BoxQpResult SolveBoxQp(const BoxQp& qp, const BoxQpParams& params = {});

// Smooth nonlinear program
//   minimize    f(x)
//   subject to  c_i(x)  = 0   for i <  num_equalities
//               c_i(x) >= 0   otherwise
//               lower <= x <= upper
// Callbacks must be deterministic; gradients are analytic.
struct NlpProblem {
  int num_variables = 0;
  int num_equalities = 0;
  int num_inequalities = 0;
  Eigen::VectorXd lower;  // sized num_variables; +-kBoxQpInfinity for free
  Eigen::VectorXd upper;
  // Returns f(x); fills grad (sized num_variables) when non-null.
  std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)> objective;
  // Fills c (equalities first, then inequalities) and the corresponding
  // Jacobian (rows in the same order) when the pointers are non-null.
  std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd* c, Eigen::MatrixXd* jac)>
      constraints;
};

enum class SolveStatus { kConverged, kMaxIterations, kInfeasible };

const char* ToString(SolveStatus status);

struct SqpParams {
  int max_iterations = 400;
  double kkt_tol = 1e-3;
  double feas_tol = 1e-4;
  double armijo = 1e-4;
  int max_backtracks = 30;
  double initial_penalty = 10.0;  // l1 merit weight, grows with the duals
  BoxQpParams qp;
  // QP steps with residuals above this are discarded in favor of the
  // augmented-Lagrangian fallback.
  double qp_accept_tol = 1e-4;
};

struct NlpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // NLP-sign duals: free for eq, >= 0 for ineq
  SolveStatus status = SolveStatus::kMaxIterations;
  double objective_value = 0.0;
  double kkt_residual = 0.0;
  double constraint_violation = 0.0;
  int iterations = 0;
};

// Sequential quadratic programming with damped BFGS curvature, an l1 merit
// line search, and an augmented-Lagrangian projected-gradient fallback for
// steps the QP cannot produce (inconsistent linearizations). Deterministic:
// the same problem and start always produce the same iterates.
NlpResult SolveSqp(const NlpProblem& problem, const Eigen::VectorXd& x0,
                   const SqpParams& params = {});

}  // namespace reactive_horizon

#endif  // REACTIVE_HORIZON_NLP_H_
