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

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace reactive_horizon {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd ClampToBox(VectorXd x, const VectorXd& lower, const VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

// l1 norm of the constraint violation: |c| for equalities, max(0, -c) for
// inequalities.
double ViolationL1(const VectorXd& c, int num_eq) {
  double s = 0.0;
  for (int i = 0; i < c.size(); ++i) {
    s += i < num_eq ? std::abs(c(i)) : std::max(0.0, -c(i));
  }
  return s;
}

double ViolationInf(const VectorXd& c, int num_eq) {
  double s = 0.0;
  for (int i = 0; i < c.size(); ++i) {
    s = std::max(s, i < num_eq ? std::abs(c(i)) : std::max(0.0, -c(i)));
  }
  return s;
}

struct Evaluation {
  double f = 0.0;
  VectorXd grad;
  VectorXd c;
  MatrixXd jac;
};

Evaluation Evaluate(const NlpProblem& problem, const VectorXd& x) {
  Evaluation e;
  e.f = problem.objective(x, &e.grad);
  const int m = problem.num_equalities + problem.num_inequalities;
  if (m > 0) {
    problem.constraints(x, &e.c, &e.jac);
  } else {
    e.c.resize(0);
    e.jac.resize(0, problem.num_variables);
  }
  return e;
}

double Merit(const Evaluation& e, int num_eq, double mu) {
  return e.f + mu * ViolationL1(e.c, num_eq);
}

// Augmented-Lagrangian value and gradient at x for multiplier estimate
// lambda and penalty rho. Inequalities use the standard shifted quadratic
// that is active only where lambda - rho c > 0.
double AugLag(const NlpProblem& problem, const VectorXd& x, const VectorXd& lambda,
              double rho, VectorXd* grad, Evaluation* out) {
  Evaluation e = Evaluate(problem, x);
  double m = e.f;
  VectorXd sigma = VectorXd::Zero(e.c.size());
  for (int i = 0; i < e.c.size(); ++i) {
    const double shift = lambda(i) - rho * e.c(i);
    if (i < problem.num_equalities) {
      m += -lambda(i) * e.c(i) + 0.5 * rho * e.c(i) * e.c(i);
      sigma(i) = shift;
    } else {
      const double active = std::max(0.0, shift);
      m += (active * active - lambda(i) * lambda(i)) / (2.0 * rho);
      sigma(i) = active;
    }
  }
  if (grad != nullptr) {
    *grad = e.grad;
    if (e.c.size() > 0) *grad -= e.jac.transpose() * sigma;
  }
  if (out != nullptr) *out = std::move(e);
  return m;
}

// Minimizes the augmented Lagrangian over the box with projected gradient
// steps and Barzilai-Borwein step lengths. Used when the QP subproblem cannot
// produce a usable step (typically an inconsistent linearization).
VectorXd AugLagFallback(const NlpProblem& problem, VectorXd x, VectorXd lambda,
                        const SqpParams& params) {
  double rho = 10.0;
  double best_viol = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < 4; ++outer) {
    VectorXd grad;
    double m = AugLag(problem, x, lambda, rho, &grad, nullptr);
    double step = 1.0 / std::max(1.0, grad.template lpNorm<Eigen::Infinity>());
    VectorXd prev_x = x;
    VectorXd prev_grad = grad;
    for (int it = 0; it < 60; ++it) {
      const VectorXd pg = x - ClampToBox(x - grad, problem.lower, problem.upper);
      if (pg.template lpNorm<Eigen::Infinity>() < 1e-9) break;
      double alpha = step;
      bool moved = false;
      for (int bt = 0; bt < 25; ++bt) {
        const VectorXd cand = ClampToBox(x - alpha * grad, problem.lower, problem.upper);
        const double mc = AugLag(problem, cand, lambda, rho, nullptr, nullptr);
        const double decrease = grad.dot(x - cand);
        if (mc <= m - params.armijo * decrease + 1e-15) {
          prev_x = x;
          prev_grad = grad;
          x = cand;
          m = AugLag(problem, x, lambda, rho, &grad, nullptr);
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
      const VectorXd s = x - prev_x;
      const VectorXd yv = grad - prev_grad;
      const double sy = s.dot(yv);
      step = sy > 1e-300 ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e3) : 1.0;
    }

    Evaluation e;
    AugLag(problem, x, lambda, rho, nullptr, &e);
    const double viol = ViolationInf(e.c, problem.num_equalities);
    for (int i = 0; i < e.c.size(); ++i) {
      const double shift = lambda(i) - rho * e.c(i);
      lambda(i) = i < problem.num_equalities ? shift : std::max(0.0, shift);
    }
    if (viol <= params.feas_tol) break;
    if (viol > 0.25 * best_viol) rho = std::min(rho * 10.0, 1e8);
    best_viol = std::min(best_viol, viol);
  }
  return x;
}

// Residuals of a candidate primal/dual pair on the original QP data. The
// bound multiplier z is taken as the clamped row image, which matches the
// fixed point the ADMM converges to.
void BoxQpResiduals(const BoxQp& qp, const VectorXd& d, const VectorXd& y,
                    double* primal, double* dual) {
  const VectorXd ad = qp.a * d;
  const VectorXd z = ad.cwiseMax(qp.l).cwiseMin(qp.u);
  *primal = (ad - z).template lpNorm<Eigen::Infinity>();
  *dual = (qp.p * d + qp.q + qp.a.transpose() * y)
              .template lpNorm<Eigen::Infinity>();
}

// Active-set polish. The ADMM stops at its tolerance, and the leftover row
// slop is poison downstream: the SQP merit weights it by the penalty, where
// it can drown the true descent signal near an optimum. Solving the KKT
// equalities of the detected active set exactly drops the slop to rounding
// level. The polished pair is kept only when it beats the iterative one on
// both residuals and carries consistently signed duals.
void PolishBoxQp(const BoxQp& qp, BoxQpResult* result) {
  const int n = static_cast<int>(qp.q.size());
  const int m = static_cast<int>(qp.a.rows());
  if (m == 0 || !result->d.allFinite() || !result->y.allFinite()) return;

  // Row i is pinned to a bound when its dual says so; equality rows always.
  // +1 upper, -1 lower, 0 inactive.
  std::vector<int> side(m, 0);
  std::vector<int> active;
  for (int i = 0; i < m; ++i) {
    if (qp.l(i) == qp.u(i)) {
      side[i] = -1;
    } else if (result->y(i) < -1e-9) {
      side[i] = -1;
    } else if (result->y(i) > 1e-9) {
      side[i] = 1;
    }
    if (side[i] != 0) active.push_back(i);
  }
  const int na = static_cast<int>(active.size());
  if (na == 0) return;

  // Regularized saddle system with iterative refinement against the
  // unregularized one.
  MatrixXd kkt = MatrixXd::Zero(n + na, n + na);
  kkt.topLeftCorner(n, n) = qp.p;
  for (int k = 0; k < na; ++k) {
    kkt.block(0, n + k, n, 1) = qp.a.row(active[k]).transpose();
    kkt.block(n + k, 0, 1, n) = qp.a.row(active[k]);
  }
  VectorXd rhs(n + na);
  rhs.head(n) = -qp.q;
  for (int k = 0; k < na; ++k) {
    rhs(n + k) = side[active[k]] > 0 ? qp.u(active[k]) : qp.l(active[k]);
  }
  MatrixXd kkt_reg = kkt;
  kkt_reg.topLeftCorner(n, n).diagonal().array() += 1e-8;
  kkt_reg.bottomRightCorner(na, na).diagonal().array() -= 1e-8;
  const Eigen::PartialPivLU<MatrixXd> lu(kkt_reg);
  VectorXd sol = lu.solve(rhs);
  for (int pass = 0; pass < 3; ++pass) {
    sol += lu.solve(rhs - kkt * sol);
  }
  if (!sol.allFinite()) return;

  const VectorXd d = sol.head(n);
  VectorXd y = VectorXd::Zero(m);
  for (int k = 0; k < na; ++k) {
    const int i = active[k];
    const double nu = sol(n + k);
    if (qp.l(i) != qp.u(i)) {
      // Wrong-signed dual on an inequality means the active set was wrong.
      if (side[i] > 0 ? nu < -1e-7 : nu > 1e-7) return;
    }
    y(i) = nu;
  }

  double pr_old, dr_old, pr_new, dr_new;
  BoxQpResiduals(qp, result->d, result->y, &pr_old, &dr_old);
  BoxQpResiduals(qp, d, y, &pr_new, &dr_new);
  if (std::max(pr_new, dr_new) <= std::max(pr_old, dr_old)) {
    result->d = d;
    result->y = y;
    result->primal_residual = pr_new;
    result->dual_residual = dr_new;
  }
}

}  // namespace

const char* ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIterations:
      return "max-iterations";
    case SolveStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

BoxQpResult SolveBoxQp(const BoxQp& qp, const BoxQpParams& params) {
  const int n = static_cast<int>(qp.q.size());
  const int m = static_cast<int>(qp.a.rows());
  BoxQpResult result;

  if (m == 0) {
    MatrixXd kkt = qp.p;
    kkt.diagonal().array() += params.sigma;
    result.d = kkt.ldlt().solve(-qp.q);
    result.y.resize(0);
    result.converged = true;
    return result;
  }

  // Ruiz equilibration. Constraint rows arrive in mixed units (dynamics
  // defects, geometric margins, bound rows), and a single step size cannot
  // serve coefficient scales spanning a few orders of magnitude. Scale
  // variables by dvec, rows by evec, the objective by cost_scale, then run
  // the iteration on the scaled data and convert back at the check points.
  MatrixXd p = qp.p;
  MatrixXd a = qp.a;
  VectorXd q = qp.q;
  VectorXd l = qp.l;
  VectorXd u = qp.u;
  VectorXd dvec = VectorXd::Ones(n);
  VectorXd evec = VectorXd::Ones(m);
  const auto scaled_bound = [](double v, double s) {
    return std::abs(v) >= kBoxQpInfinity ? v : v * s;
  };
  for (int pass = 0; pass < 10; ++pass) {
    for (int j = 0; j < n; ++j) {
      const double norm = std::max(p.col(j).template lpNorm<Eigen::Infinity>(),
                                   a.col(j).template lpNorm<Eigen::Infinity>());
      const double s = norm > 1e-12 ? 1.0 / std::sqrt(norm) : 1.0;
      p.col(j) *= s;
      p.row(j) *= s;
      a.col(j) *= s;
      q(j) *= s;
      dvec(j) *= s;
    }
    for (int i = 0; i < m; ++i) {
      const double norm = a.row(i).template lpNorm<Eigen::Infinity>();
      const double s = norm > 1e-12 ? 1.0 / std::sqrt(norm) : 1.0;
      a.row(i) *= s;
      l(i) = scaled_bound(l(i), s);
      u(i) = scaled_bound(u(i), s);
      evec(i) *= s;
    }
  }
  double cost_scale = 1.0;
  {
    double col_mean = 0.0;
    for (int j = 0; j < n; ++j) {
      col_mean += p.col(j).template lpNorm<Eigen::Infinity>();
    }
    col_mean /= n;
    const double denom =
        std::max(col_mean, q.template lpNorm<Eigen::Infinity>());
    if (denom > 1e-12) cost_scale = 1.0 / denom;
    p *= cost_scale;
    q *= cost_scale;
  }

  // Per-row step sizes: equality rows (l == u) get a stiffer rho, as in
  // OSQP, and the base step adapts to the primal/dual residual balance.
  double rho_base = params.rho;
  VectorXd rho(m);
  const auto fill_rho = [&] {
    for (int i = 0; i < m; ++i) {
      rho(i) = qp.l(i) == qp.u(i) ? rho_base * params.eq_rho_scale : rho_base;
    }
  };
  fill_rho();

  Eigen::LDLT<MatrixXd> ldlt;
  const auto refactor = [&] {
    MatrixXd kkt = p;
    kkt.diagonal().array() += params.sigma;
    kkt.noalias() += a.transpose() * rho.asDiagonal() * a;
    ldlt.compute(kkt);
  };
  refactor();

  VectorXd d = VectorXd::Zero(n);
  VectorXd z = VectorXd::Zero(m).cwiseMax(l).cwiseMin(u);
  VectorXd y = VectorXd::Zero(m);
  if (qp.warm_y.size() == m) {
    y = cost_scale * qp.warm_y.cwiseQuotient(evec);
  }
  const double alpha = params.relaxation;

  for (int it = 1; it <= params.max_iterations; ++it) {
    const VectorXd rhs =
        params.sigma * d - q + a.transpose() * (rho.cwiseProduct(z) - y);
    const VectorXd dt = ldlt.solve(rhs);
    const VectorXd zt = a * dt;
    d = alpha * dt + (1.0 - alpha) * d;
    const VectorXd z_relaxed = alpha * zt + (1.0 - alpha) * z;
    const VectorXd z_next =
        (z_relaxed + y.cwiseQuotient(rho)).cwiseMax(l).cwiseMin(u);
    y += rho.cwiseProduct(z_relaxed - z_next);
    z = z_next;

    if (it % 10 == 0 || it == params.max_iterations) {
      // Residuals of the original problem, from the unscaled iterates.
      const VectorXd x_hat = dvec.cwiseProduct(d);
      const VectorXd y_hat = evec.cwiseProduct(y) / cost_scale;
      const VectorXd z_hat = z.cwiseQuotient(evec);
      const VectorXd ad = qp.a * x_hat;
      const VectorXd pd = qp.p * x_hat;
      const VectorXd aty = qp.a.transpose() * y_hat;
      result.primal_residual = (ad - z_hat).template lpNorm<Eigen::Infinity>();
      result.dual_residual =
          (pd + qp.q + aty).template lpNorm<Eigen::Infinity>();
      const double eps_prim =
          params.eps_abs +
          params.eps_rel * std::max(ad.template lpNorm<Eigen::Infinity>(),
                                    z_hat.template lpNorm<Eigen::Infinity>());
      const double eps_dual =
          params.eps_abs +
          params.eps_rel * std::max({pd.template lpNorm<Eigen::Infinity>(),
                                     qp.q.template lpNorm<Eigen::Infinity>(),
                                     aty.template lpNorm<Eigen::Infinity>()});
      result.iterations = it;
      if (result.primal_residual <= eps_prim && result.dual_residual <= eps_dual) {
        result.converged = true;
        break;
      }

      // Rebalance the step size toward whichever residual is lagging,
      // scaled-space residuals with OSQP's normalization.
      if (it % 100 == 0 && it < params.max_iterations) {
        const VectorXd ad_s = a * d;
        const VectorXd pd_s = p * d;
        const VectorXd aty_s = a.transpose() * y;
        const double rp = (ad_s - z).template lpNorm<Eigen::Infinity>() /
                          std::max({ad_s.template lpNorm<Eigen::Infinity>(),
                                    z.template lpNorm<Eigen::Infinity>(), 1e-12});
        const double rd = (pd_s + q + aty_s).template lpNorm<Eigen::Infinity>() /
                          std::max({pd_s.template lpNorm<Eigen::Infinity>(),
                                    q.template lpNorm<Eigen::Infinity>(),
                                    aty_s.template lpNorm<Eigen::Infinity>(),
                                    1e-12});
        const double factor =
            std::clamp(std::sqrt(rp / std::max(rd, 1e-16)), 0.1, 10.0);
        if (factor > 5.0 || factor < 0.2) {
          rho_base = std::clamp(rho_base * factor, 1e-6, 1e6);
          fill_rho();
          refactor();
        }
      }
    }
  }
  result.d = dvec.cwiseProduct(d);
  result.y = evec.cwiseProduct(y) / cost_scale;
  PolishBoxQp(qp, &result);
  return result;
}

NlpResult SolveSqp(const NlpProblem& problem, const Eigen::VectorXd& x0,
                   const SqpParams& params) {
  const int n = problem.num_variables;
  const int m = problem.num_equalities + problem.num_inequalities;
  if (x0.size() != n) throw std::invalid_argument("x0 size mismatch");
  if (problem.lower.size() != n || problem.upper.size() != n) {
    throw std::invalid_argument("bound size mismatch");
  }

  NlpResult result;
  VectorXd x = ClampToBox(x0, problem.lower, problem.upper);
  VectorXd lambda = VectorXd::Zero(m);
  MatrixXd hessian = MatrixXd::Identity(n, n);
  double mu = params.initial_penalty;
  Evaluation eval = Evaluate(problem, x);
  int stalls = 0;
  bool scaled_hessian = false;
  VectorXd warm_duals;
  // Trust region on the step, adapted by the merit ratio test below. A line
  // search is not enough here: once the quasi-Newton model picks up bad
  // curvature it keeps proposing long steps that backtrack to a crawl, while
  // the radius shrinks until the model is trusted again.
  double tr_radius = 10.0;
  int rejects = 0;

  for (int it = 0; it <= params.max_iterations; ++it) {
    // Stationarity of the Lagrangian projected onto the box, with the current
    // multiplier estimate. This is the number reported to callers.
    VectorXd grad_lag = eval.grad;
    if (m > 0) grad_lag -= eval.jac.transpose() * lambda;
    const double kkt =
        (x - ClampToBox(x - grad_lag, problem.lower, problem.upper))
            .template lpNorm<Eigen::Infinity>();
    const double viol = ViolationInf(eval.c, problem.num_equalities);

    result.x = x;
    result.multipliers = lambda;
    result.objective_value = eval.f;
    result.kkt_residual = kkt;
    result.constraint_violation = viol;
    result.iterations = it;
    if (viol <= params.feas_tol && kkt <= params.kkt_tol) {
      result.status = SolveStatus::kConverged;
      return result;
    }
    if (it == params.max_iterations || stalls >= 3) break;

    // QP subproblem around x: box rows are appended to the linearized
    // constraints so the step respects the bounds natively. Row duals from
    // the previous accepted step seed the ADMM, which typically cuts its
    // iteration count by an order of magnitude late in the solve.
    BoxQp qp;
    qp.p = hessian;
    qp.q = eval.grad;
    qp.a.resize(m + n, n);
    qp.l.resize(m + n);
    qp.u.resize(m + n);
    if (m > 0) {
      qp.a.topRows(m) = eval.jac;
      for (int i = 0; i < m; ++i) {
        qp.l(i) = -eval.c(i);
        qp.u(i) = i < problem.num_equalities ? -eval.c(i) : kBoxQpInfinity;
      }
    }
    qp.a.bottomRows(n) = MatrixXd::Identity(n, n);
    qp.l.tail(n) = (problem.lower - x).cwiseMax(-tr_radius);
    qp.u.tail(n) = (problem.upper - x).cwiseMin(tr_radius);
    qp.warm_y = warm_duals;
    const BoxQpResult step = SolveBoxQp(qp, params.qp);
    if (std::getenv("RH_NLP_TRACE") != nullptr) {
      double kkt_qp = -1.0;
      if (m > 0 && step.d.allFinite()) {
        VectorXd lam = -step.y.head(m);
        for (int i = problem.num_equalities; i < m; ++i) {
          lam(i) = std::max(0.0, lam(i));
        }
        VectorXd gl = eval.grad - eval.jac.transpose() * lam;
        kkt_qp = (x - ClampToBox(x - gl, problem.lower, problem.upper))
                     .template lpNorm<Eigen::Infinity>();
      }
      std::fprintf(stderr,
                   "it %d viol %.2e kkt %.2e kktq %.2e qp_iters %d conv %d pr "
                   "%.1e dr %.1e |d| %.2e tr %.1e\n",
                   it, viol, kkt, kkt_qp, step.iterations, int(step.converged),
                   step.primal_residual, step.dual_residual,
                   step.d.template lpNorm<Eigen::Infinity>(), tr_radius);
    }

    const bool qp_usable =
        step.d.allFinite() &&
        (step.converged || (step.primal_residual <= params.qp_accept_tol &&
                            step.dual_residual <= params.qp_accept_tol));
    if (!qp_usable) {
      x = AugLagFallback(problem, x, lambda, params);
      eval = Evaluate(problem, x);
      hessian = MatrixXd::Identity(n, n);  // curvature is stale after the jump
      scaled_hessian = false;
      warm_duals.resize(0);
      tr_radius = std::max(tr_radius, 1.0);
      rejects = 0;
      ++stalls;
      continue;
    }
    warm_duals = step.y;

    const VectorXd d = step.d;
    VectorXd lambda_next = m > 0 ? VectorXd(-step.y.head(m)) : VectorXd(0);
    for (int i = problem.num_equalities; i < m; ++i) {
      lambda_next(i) = std::max(0.0, lambda_next(i));
    }

    // Exact-penalty weight must dominate the multipliers for the merit
    // function to accept KKT points.
    mu = std::max(mu, 1.5 * lambda_next.template lpNorm<Eigen::Infinity>() + 1e-3);

    const double viol_l1 = ViolationL1(eval.c, problem.num_equalities);
    const double merit0 = eval.f + mu * viol_l1;
    // Model merit reduction at the returned step. The violation term uses the
    // linearized constraints at d rather than assuming the subproblem zeroed
    // them: the QP solves rows only to its own tolerance, and crediting the
    // model with violation it never removed leaves a phantom prediction that
    // no real step can match once the iterate reaches that floor.
    const double viol_lin =
        m > 0 ? ViolationL1(eval.c + eval.jac * d, problem.num_equalities)
              : 0.0;
    const double pred = mu * (viol_l1 - viol_lin) - eval.grad.dot(d) -
                        0.5 * d.dot(hessian * d);

    bool accepted = false;
    // Advances the iterate and applies the damped BFGS update with Powell's
    // correction; Shanno-Phua scaling replaces the unit seed on the first
    // pair, without which early steps are wildly mis-scaled on large
    // problems.
    const auto advance = [&](const VectorXd& cand, Evaluation&& eval_next) {
      VectorXd g_new = eval_next.grad;
      VectorXd g_old = eval.grad;
      if (m > 0) {
        g_new -= eval_next.jac.transpose() * lambda_next;
        g_old -= eval.jac.transpose() * lambda_next;
      }
      const VectorXd s = cand - x;
      VectorXd yv = g_new - g_old;
      if (!scaled_hessian) {
        const double sy0 = s.dot(yv);
        if (sy0 > 1e-12) {
          const double gamma = std::clamp(yv.squaredNorm() / sy0, 1e-3, 1e6);
          hessian = gamma * MatrixXd::Identity(n, n);
        }
        scaled_hessian = true;
      }
      const VectorXd bs = hessian * s;
      const double sbs = s.dot(bs);
      const double sy = s.dot(yv);
      if (sbs > 1e-300) {
        if (sy < 0.2 * sbs) {
          const double theta = 0.8 * sbs / (sbs - sy);
          yv = theta * yv + (1.0 - theta) * bs;
        }
        const double sy_damped = s.dot(yv);
        if (sy_damped > 1e-300) {
          hessian += yv * yv.transpose() / sy_damped - bs * bs.transpose() / sbs;
        }
      }
      x = cand;
      eval = std::move(eval_next);
      lambda = lambda_next;
      accepted = true;
      rejects = 0;
      if (s.template lpNorm<Eigen::Infinity>() > 1e-14) stalls = 0;
    };
    // Ratio of achieved to predicted merit reduction decides acceptance and
    // steers the radius.
    const auto ratio_of = [&](const Evaluation& e) {
      return (merit0 - Merit(e, problem.num_equalities, mu)) /
             std::max(pred, 1e-16);
    };

    const double d_inf = d.template lpNorm<Eigen::Infinity>();
    double dbg_ratio = -1e9;
    double dbg_ratio_soc = -1e9;
    {
      const VectorXd cand = ClampToBox(x + d, problem.lower, problem.upper);
      Evaluation eval_next = Evaluate(problem, cand);
      const double ratio = ratio_of(eval_next);
      dbg_ratio = ratio;
      if (pred > 0.0 && ratio >= 0.1) {
        const bool near_edge = d_inf >= 0.9 * tr_radius;
        advance(cand, std::move(eval_next));
        if (ratio >= 0.75 && near_edge) {
          tr_radius = std::min(2.0 * tr_radius, 1e3);
        }
      } else if (m > 0) {
        // Second-order correction: constraint curvature along d inflates the
        // merit and shrinks steps to a crawl (the Maratos effect). Re-solve
        // the subproblem with the constraint constants taken at x + d so the
        // correction cancels the curvature term, and retry a full step.
        BoxQp soc = qp;
        for (int i = 0; i < m; ++i) {
          const double shifted =
              -(eval_next.c(i) - eval.jac.row(i).dot(cand - x));
          soc.l(i) = shifted;
          if (i < problem.num_equalities) {
            soc.u(i) = shifted;
          }
        }
        soc.warm_y = step.y;
        const BoxQpResult soc_step = SolveBoxQp(soc, params.qp);
        const bool soc_usable =
            soc_step.d.allFinite() &&
            (soc_step.converged ||
             (soc_step.primal_residual <= params.qp_accept_tol &&
              soc_step.dual_residual <= params.qp_accept_tol));
        if (soc_usable) {
          const VectorXd cand2 =
              ClampToBox(x + soc_step.d, problem.lower, problem.upper);
          Evaluation eval_soc = Evaluate(problem, cand2);
          dbg_ratio_soc = ratio_of(eval_soc);
          if (pred > 0.0 && dbg_ratio_soc >= 0.1) {
            lambda_next = -soc_step.y.head(m);
            for (int i = problem.num_equalities; i < m; ++i) {
              lambda_next(i) = std::max(0.0, lambda_next(i));
            }
            advance(cand2, std::move(eval_soc));
          }
        }
      }
    }

    if (!accepted) {
      if (std::getenv("RH_NLP_TRACE") != nullptr) {
        std::fprintf(stderr,
                     "   reject pred %.3e ratio %.3e soc_ratio %.3e mu %.1e\n",
                     pred, dbg_ratio, dbg_ratio_soc, mu);
      }
      // Shrink and retry from the same point. The quadratic model misled us;
      // a smaller radius restores agreement. Only a long run of rejections
      // falls back to the augmented Lagrangian step.
      tr_radius = std::max(0.25 * std::min(d_inf, tr_radius), 1e-8);
      if (++rejects >= 30) {
        x = AugLagFallback(problem, x, lambda, params);
        eval = Evaluate(problem, x);
        hessian = MatrixXd::Identity(n, n);
        scaled_hessian = false;
        warm_duals.resize(0);
        tr_radius = 10.0;
        rejects = 0;
        ++stalls;
      }
    }
  }

  result.status = result.constraint_violation > params.feas_tol
                      ? SolveStatus::kInfeasible
                      : SolveStatus::kMaxIterations;
  return result;
}

}  // namespace reactive_horizon
