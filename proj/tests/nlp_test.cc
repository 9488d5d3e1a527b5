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

#include "reactive_horizon/nlp.h"

#include <cmath>

#include <gtest/gtest.h>

namespace reactive_horizon {
namespace {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

VectorXd Vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

TEST(BoxQpTest, UnconstrainedMatchesClosedForm) {
  BoxQp qp;
  qp.p = MatrixXd::Identity(2, 2);
  qp.q = Vec2(1.0, -2.0);
  qp.a = MatrixXd::Identity(2, 2);
  qp.l = Vec2(-kBoxQpInfinity, -kBoxQpInfinity);
  qp.u = Vec2(kBoxQpInfinity, kBoxQpInfinity);
  const BoxQpResult r = SolveBoxQp(qp);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.d(0), -1.0, 1e-7);
  EXPECT_NEAR(r.d(1), 2.0, 1e-7);
}

TEST(BoxQpTest, EqualityRowMatchesKkt) {
  BoxQp qp;
  qp.p = MatrixXd::Identity(2, 2);
  qp.q = VectorXd::Zero(2);
  qp.a.resize(1, 2);
  qp.a << 1.0, 1.0;
  qp.l = VectorXd::Constant(1, 1.0);
  qp.u = VectorXd::Constant(1, 1.0);
  const BoxQpResult r = SolveBoxQp(qp);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.d(0), 0.5, 1e-7);
  EXPECT_NEAR(r.d(1), 0.5, 1e-7);
  EXPECT_NEAR(r.y(0), -0.5, 1e-6);  // d + A'y = 0
}

TEST(BoxQpTest, ActiveUpperBoundDualIsPositive) {
  BoxQp qp;
  qp.p = MatrixXd::Identity(1, 1);
  qp.q = VectorXd::Constant(1, -2.0);  // unconstrained min at d = 2
  qp.a = MatrixXd::Identity(1, 1);
  qp.l = VectorXd::Constant(1, -kBoxQpInfinity);
  qp.u = VectorXd::Constant(1, 1.0);
  const BoxQpResult r = SolveBoxQp(qp);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.d(0), 1.0, 1e-7);
  EXPECT_NEAR(r.y(0), 1.0, 1e-6);
}

TEST(BoxQpTest, ActiveLowerBoundDualIsNegative) {
  BoxQp qp;
  qp.p = MatrixXd::Identity(1, 1);
  qp.q = VectorXd::Constant(1, 1.0);  // unconstrained min at d = -1
  qp.a = MatrixXd::Identity(1, 1);
  qp.l = VectorXd::Constant(1, 0.0);
  qp.u = VectorXd::Constant(1, kBoxQpInfinity);
  const BoxQpResult r = SolveBoxQp(qp);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.d(0), 0.0, 1e-7);
  EXPECT_NEAR(r.y(0), -1.0, 1e-6);
}

NlpProblem UnconstrainedProblem(
    std::function<double(const VectorXd&, VectorXd*)> objective, int n) {
  NlpProblem p;
  p.num_variables = n;
  p.lower = VectorXd::Constant(n, -kBoxQpInfinity);
  p.upper = VectorXd::Constant(n, kBoxQpInfinity);
  p.objective = std::move(objective);
  return p;
}

TEST(SqpTest, QuadraticBowlConvergesImmediately) {
  const Vector2d target(1.5, -0.5);
  NlpProblem p = UnconstrainedProblem(
      [&](const VectorXd& x, VectorXd* g) {
        if (g != nullptr) *g = x - VectorXd(target);
        return 0.5 * (x - VectorXd(target)).squaredNorm();
      },
      2);
  const NlpResult r = SolveSqp(p, VectorXd::Zero(2));
  EXPECT_EQ(r.status, SolveStatus::kConverged);
  EXPECT_LE(r.iterations, 3);
  EXPECT_NEAR((r.x - VectorXd(target)).norm(), 0.0, 1e-6);
}

double Rosenbrock(const VectorXd& x, VectorXd* g) {
  const double a = 1.0 - x(0);
  const double b = x(1) - x(0) * x(0);
  if (g != nullptr) {
    g->resize(2);
    (*g)(0) = -2.0 * a - 400.0 * x(0) * b;
    (*g)(1) = 200.0 * b;
  }
  return a * a + 100.0 * b * b;
}

TEST(SqpTest, RosenbrockFromStandardStart) {
  NlpProblem p = UnconstrainedProblem(Rosenbrock, 2);
  const NlpResult r = SolveSqp(p, Vec2(-1.2, 1.0));
  EXPECT_EQ(r.status, SolveStatus::kConverged);
  EXPECT_NEAR(r.x(0), 1.0, 1e-4);
  EXPECT_NEAR(r.x(1), 1.0, 1e-4);
}

NlpProblem CircleProjectionProblem() {
  NlpProblem p;
  p.num_variables = 2;
  p.num_equalities = 1;
  p.lower = VectorXd::Constant(2, -kBoxQpInfinity);
  p.upper = VectorXd::Constant(2, kBoxQpInfinity);
  p.objective = [](const VectorXd& x, VectorXd* g) {
    const Vector2d target(2.0, 0.0);
    if (g != nullptr) *g = x - VectorXd(target);
    return 0.5 * (x - VectorXd(target)).squaredNorm();
  };
  p.constraints = [](const VectorXd& x, VectorXd* c, MatrixXd* jac) {
    if (c != nullptr) {
      c->resize(1);
      (*c)(0) = x.squaredNorm() - 1.0;
    }
    if (jac != nullptr) {
      jac->resize(1, 2);
      jac->row(0) = 2.0 * x.transpose();
    }
  };
  return p;
}

TEST(SqpTest, ProjectsOntoCircle) {
  const NlpResult r = SolveSqp(CircleProjectionProblem(), Vec2(0.1, 0.9));
  EXPECT_EQ(r.status, SolveStatus::kConverged);
  EXPECT_NEAR(r.x(0), 1.0, 1e-4);
  EXPECT_NEAR(r.x(1), 0.0, 1e-4);
  EXPECT_LE(r.constraint_violation, 1e-4);
  EXPECT_LE(r.kkt_residual, 1e-3);
}

TEST(SqpTest, WarmStartIsAFixedPoint) {
  const NlpProblem p = CircleProjectionProblem();
  const NlpResult cold = SolveSqp(p, Vec2(0.1, 0.9));
  ASSERT_EQ(cold.status, SolveStatus::kConverged);
  const NlpResult warm = SolveSqp(p, cold.x);
  EXPECT_EQ(warm.status, SolveStatus::kConverged);
  EXPECT_LE(warm.iterations, 2);
  // The restart may polish within the basin; it must not leave it. The cold
  // point itself is only converged to the kkt tolerance.
  EXPECT_NEAR((warm.x - cold.x).norm(), 0.0, 1e-4);
}

TEST(SqpTest, InequalitiesActivateAtSolution) {
  NlpProblem p;
  p.num_variables = 2;
  p.num_inequalities = 2;
  p.lower = VectorXd::Constant(2, -kBoxQpInfinity);
  p.upper = VectorXd::Constant(2, kBoxQpInfinity);
  // min (x1+1)^2 + (x2-2)^2 subject to x1 >= 0 and x2 <= 1.
  p.objective = [](const VectorXd& x, VectorXd* g) {
    if (g != nullptr) *g = 2.0 * (x - Vec2(-1.0, 2.0));
    return (x - Vec2(-1.0, 2.0)).squaredNorm();
  };
  p.constraints = [](const VectorXd& x, VectorXd* c, MatrixXd* jac) {
    if (c != nullptr) *c = Vec2(x(0), 1.0 - x(1));
    if (jac != nullptr) {
      jac->resize(2, 2);
      *jac << 1.0, 0.0, 0.0, -1.0;
    }
  };
  const NlpResult r = SolveSqp(p, Vec2(3.0, -3.0));
  EXPECT_EQ(r.status, SolveStatus::kConverged);
  EXPECT_NEAR(r.x(0), 0.0, 1e-5);
  EXPECT_NEAR(r.x(1), 1.0, 1e-5);
  EXPECT_GE(r.multipliers(0), 0.0);
  EXPECT_GE(r.multipliers(1), 0.0);
}

TEST(SqpTest, BoundsClampTheSolution) {
  NlpProblem p = UnconstrainedProblem(
      [](const VectorXd& x, VectorXd* g) {
        if (g != nullptr) *g = 2.0 * (x - Vec2(3.0, -3.0));
        return (x - Vec2(3.0, -3.0)).squaredNorm();
      },
      2);
  p.lower = VectorXd::Constant(2, -1.0);
  p.upper = VectorXd::Constant(2, 1.0);
  const NlpResult r = SolveSqp(p, VectorXd::Zero(2));
  EXPECT_EQ(r.status, SolveStatus::kConverged);
  EXPECT_NEAR(r.x(0), 1.0, 1e-6);
  EXPECT_NEAR(r.x(1), -1.0, 1e-6);
}

TEST(SqpTest, HyperbolaConstraintFindsNearestBranchPoint) {
  NlpProblem p;
  p.num_variables = 2;
  p.num_inequalities = 1;
  p.lower = VectorXd::Constant(2, -kBoxQpInfinity);
  p.upper = VectorXd::Constant(2, kBoxQpInfinity);
  // min |x|^2 subject to x1 x2 >= 1; nearest point from the first quadrant
  // is (1, 1).
  p.objective = [](const VectorXd& x, VectorXd* g) {
    if (g != nullptr) *g = 2.0 * x;
    return x.squaredNorm();
  };
  p.constraints = [](const VectorXd& x, VectorXd* c, MatrixXd* jac) {
    if (c != nullptr) {
      c->resize(1);
      (*c)(0) = x(0) * x(1) - 1.0;
    }
    if (jac != nullptr) {
      jac->resize(1, 2);
      *jac << x(1), x(0);
    }
  };
  const NlpResult r = SolveSqp(p, Vec2(2.0, 2.0));
  EXPECT_EQ(r.status, SolveStatus::kConverged);
  EXPECT_NEAR(r.x(0), 1.0, 1e-4);
  EXPECT_NEAR(r.x(1), 1.0, 1e-4);
}

TEST(SqpTest, ContradictoryConstraintsReportInfeasible) {
  NlpProblem p;
  p.num_variables = 1;
  p.num_equalities = 1;
  p.lower = VectorXd::Constant(1, -kBoxQpInfinity);
  p.upper = VectorXd::Constant(1, 0.0);  // x <= 0
  p.objective = [](const VectorXd& x, VectorXd* g) {
    if (g != nullptr) *g = VectorXd::Zero(1);
    return 0.0;
  };
  p.constraints = [](const VectorXd& x, VectorXd* c, MatrixXd* jac) {
    if (c != nullptr) *c = VectorXd::Constant(1, x(0) - 1.0);  // x = 1
    if (jac != nullptr) *jac = MatrixXd::Identity(1, 1);
  };
  SqpParams params;
  params.max_iterations = 40;
  const NlpResult r = SolveSqp(p, VectorXd::Zero(1), params);
  EXPECT_EQ(r.status, SolveStatus::kInfeasible);
  EXPECT_GT(r.constraint_violation, 0.5);
}

TEST(SqpTest, IterationBudgetSurfacesAsMaxIterations) {
  NlpProblem p = UnconstrainedProblem(Rosenbrock, 2);
  SqpParams params;
  params.max_iterations = 3;
  const NlpResult r = SolveSqp(p, Vec2(-1.2, 1.0), params);
  EXPECT_EQ(r.status, SolveStatus::kMaxIterations);
}

TEST(SqpTest, DeterministicIterates) {
  NlpProblem p = UnconstrainedProblem(Rosenbrock, 2);
  const NlpResult a = SolveSqp(p, Vec2(-1.2, 1.0));
  const NlpResult b = SolveSqp(p, Vec2(-1.2, 1.0));
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.x(0), b.x(0));
  EXPECT_EQ(a.x(1), b.x(1));
  EXPECT_EQ(a.kkt_residual, b.kkt_residual);
}

}  // namespace
}  // namespace reactive_horizon
