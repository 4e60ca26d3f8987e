/* Copyright 2026 The QOC Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "qoc/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

namespace qoc {

const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::ConvergedGradient: return "converged_gradient";
    case TerminationReason::ConvergedObjective: return "converged_objective";
    case TerminationReason::MaxIterations: return "max_iterations";
    case TerminationReason::LineSearchFailure: return "line_search_failure";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

struct HistoryPair {
  RealVector s;
  RealVector y;
  double rho;
};

RealVector flatten(const RealMatrix& m) {
  return Eigen::Map<const RealVector>(m.data(), m.size());
}

RealMatrix unflatten(const RealVector& v, int rows, int cols) {
  return Eigen::Map<const RealMatrix>(v.data(), rows, cols);
}

// Two-loop recursion, d = -H g restricted to the free set.
RealVector lbfgs_direction(const std::deque<HistoryPair>& history, const RealVector& grad,
                           const Eigen::ArrayXd& free_mask) {
  RealVector q = -(grad.array() * free_mask).matrix();
  if (history.empty()) return q;
  std::vector<double> alpha(history.size());
  for (int i = int(history.size()) - 1; i >= 0; --i) {
    alpha[size_t(i)] = history[size_t(i)].rho * history[size_t(i)].s.dot(q);
    q -= alpha[size_t(i)] * history[size_t(i)].y;
  }
  const auto& last = history.back();
  const double gamma = last.s.dot(last.y) / last.y.squaredNorm();
  q *= gamma;
  for (size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * history[i].y.dot(q);
    q += (alpha[i] - beta) * history[i].s;
  }
  q = (q.array() * free_mask).matrix();
  return q;
}

}  // namespace

OptimizationResult optimize(const ControlProblem& problem, const Pulse& initial,
                            const OptimizerConfig& config, EvalMode mode) {
  if (config.memory < 1) throw ValidationError("optimizer memory must be >= 1");
  if (!(config.gradient_tolerance > 0.0) || !(config.objective_tolerance > 0.0))
    throw ValidationError("optimizer tolerances must be positive");
  const int n = problem.grid.steps;
  const int num_controls = problem.num_controls();
  const Eigen::Index dim = Eigen::Index(n) * num_controls;

  RealVector lo(dim), hi(dim);
  for (int k = 0; k < num_controls; ++k) {
    lo.segment(Eigen::Index(k) * n, n).setConstant(-problem.bounds[size_t(k)]);
    hi.segment(Eigen::Index(k) * n, n).setConstant(problem.bounds[size_t(k)]);
  }
  auto project = [&](RealVector x) {
    return RealVector(x.cwiseMax(lo).cwiseMin(hi));
  };

  RealVector x = flatten(initial.amplitudes);
  if (((x - project(x)).array() != 0.0).any())
    throw ValidationError("initial pulse lies outside the amplitude bounds");

  auto evaluate = [&](const RealVector& point, ObjectiveReport& report) {
    Pulse p;
    p.grid = problem.grid;
    p.amplitudes = unflatten(point, n, num_controls);
    report = objective_and_gradient(problem, p, mode);
    return report.phi;
  };

  OptimizationResult result;
  ObjectiveReport report;
  double phi = evaluate(x, report);
  RealVector grad = flatten(report.gradient);
  result.phi_history.push_back(phi);
  result.termination = TerminationReason::MaxIterations;

  std::deque<HistoryPair> history;
  const double bound_eps = 1e-12;

  auto projected_gradient_norm = [&](const RealVector& point, const RealVector& g) {
    return (point - project(point - g)).cwiseAbs().maxCoeff();
  };

  int iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    if (projected_gradient_norm(x, grad) <= config.gradient_tolerance) {
      result.termination = TerminationReason::ConvergedGradient;
      break;
    }
    const auto started = Clock::now();

    // Freeze coordinates pinned at a bound with the gradient pushing outward.
    Eigen::ArrayXd free_mask = Eigen::ArrayXd::Ones(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const bool at_lo = x(i) <= lo(i) + bound_eps && grad(i) > 0.0;
      const bool at_hi = x(i) >= hi(i) - bound_eps && grad(i) < 0.0;
      if (at_lo || at_hi) free_mask(i) = 0.0;
    }
    RealVector direction = lbfgs_direction(history, grad, free_mask);
    double slope = direction.dot(grad);
    if (!(slope < 0.0)) {  // not a descent direction, fall back to steepest descent
      direction = -(grad.array() * free_mask).matrix();
      slope = direction.dot(grad);
      if (!(slope < 0.0)) {
        result.termination = TerminationReason::ConvergedGradient;
        break;
      }
    }

    // Largest step that keeps every free coordinate inside the box.
    double alpha_max = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (direction(i) > 0.0)
        alpha_max = std::min(alpha_max, (hi(i) - x(i)) / direction(i));
      else if (direction(i) < 0.0)
        alpha_max = std::min(alpha_max, (lo(i) - x(i)) / direction(i));
    }
    alpha_max = std::max(alpha_max, 0.0);

    // Strong Wolfe search; bisection refinement when bracketing.
    double alpha = std::min(1.0, alpha_max > 0.0 ? alpha_max : 1.0);
    double alpha_lo_b = 0.0, alpha_hi_b = -1.0;  // bracket, hi < 0 means open
    bool accepted = false;
    ObjectiveReport trial_report;
    RealVector x_new;
    double phi_new = phi;
    for (int ls = 0; ls < config.max_line_search_steps; ++ls) {
      x_new = project(x + alpha * direction);
      try {
        phi_new = evaluate(x_new, trial_report);
      } catch (const NumericalError&) {
        // trial point outside the propagator's convergence region; shorten
        phi_new = std::numeric_limits<double>::infinity();
      }
      const double armijo = phi + config.wolfe_c1 * alpha * slope;
      if (phi_new > armijo) {
        alpha_hi_b = alpha;  // too long
        alpha = (alpha_lo_b + alpha) / 2.0;
        continue;
      }
      const double slope_new = flatten(trial_report.gradient).dot(direction);
      if (std::abs(slope_new) <= -config.wolfe_c2 * slope || alpha >= alpha_max) {
        accepted = true;  // curvature holds, or the box truncated the ray
        break;
      }
      if (slope_new > 0.0) {
        alpha_hi_b = alpha;
        alpha = (alpha_lo_b + alpha) / 2.0;
        continue;
      }
      alpha_lo_b = alpha;  // still descending, lengthen
      alpha = (alpha_hi_b > 0.0) ? (alpha_lo_b + alpha_hi_b) / 2.0
                                 : std::min(2.0 * alpha, alpha_max > 0.0 ? alpha_max : 2.0 * alpha);
    }
    if (!accepted && phi_new <= phi + config.wolfe_c1 * alpha * slope) accepted = true;

    const double seconds = std::chrono::duration<double>(Clock::now() - started).count();
    if (!accepted) {
      result.seconds_per_iteration.push_back(seconds);
      result.termination = TerminationReason::LineSearchFailure;
      break;
    }

    RealVector grad_new = flatten(trial_report.gradient);
    HistoryPair pair;
    pair.s = x_new - x;
    pair.y = grad_new - grad;
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-10 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (int(history.size()) > config.memory) history.pop_front();
    }

    const double change = phi - phi_new;
    x = std::move(x_new);
    phi = phi_new;
    grad = std::move(grad_new);
    report = std::move(trial_report);
    result.phi_history.push_back(phi);
    result.seconds_per_iteration.push_back(seconds);

    if (change <= config.objective_tolerance * std::max(1.0, std::abs(phi))) {
      result.termination = TerminationReason::ConvergedObjective;
      ++iter;
      break;
    }
  }

  result.iterations = iter;
  result.pulse.grid = problem.grid;
  result.pulse.amplitudes = unflatten(x, n, num_controls);
  result.final_report = std::move(report);
  return result;
}

}  // namespace qoc
