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
#include "qoc/grape.hpp"

#include <cmath>

namespace qoc {

namespace {

constexpr double kJdImagTol = 1e-9;
// Floor for 1/(2 sqrt(J)) once the objective leaves the perturbative regime;
// keeps the descent direction usable while phi is pinned at 1.
constexpr double kPhiPrefactorFloor = 1e-2;

void check_pulse(const ControlProblem& problem, const Pulse& pulse) {
  if (pulse.steps() != problem.grid.steps)
    throw ValidationError("pulse steps do not match the problem grid");
  if (pulse.controls() != problem.num_controls())
    throw ValidationError("pulse controls do not match the problem");
}

void check_steps(const ControlProblem& problem, const std::vector<Operator>& steps) {
  if (int(steps.size()) != problem.grid.steps)
    throw ValidationError("step operator list does not match the problem grid");
}

// x += coeff * (op y), preallocated scratch
void add_applied(const Operator& op, const StateVector& y, Complex coeff, StateVector& x,
                 StateVector& scratch) {
  op.apply(y, scratch);
  x.noalias() += coeff * scratch;
}

}  // namespace

std::vector<Operator> assemble_step_operators(const ControlProblem& problem, const Pulse& pulse) {
  check_pulse(problem, pulse);
  const int n = problem.grid.steps;
  std::vector<std::vector<Eigen::Triplet<Complex>>> parts;
  parts.reserve(problem.controls.size() + 1);
  parts.push_back(problem.drift.triplets());
  for (const auto& c : problem.controls) parts.push_back(c.triplets());

  std::vector<Operator> steps;
  steps.reserve(size_t(n));
  std::vector<Eigen::Triplet<Complex>> merged;
  for (int j = 0; j < n; ++j) {
    merged.clear();
    merged.insert(merged.end(), parts[0].begin(), parts[0].end());
    for (int k = 0; k < problem.num_controls(); ++k) {
      const double u = pulse.amplitudes(j, k);
      if (u == 0.0) continue;
      for (const auto& t : parts[size_t(k) + 1]) merged.emplace_back(t.row(), t.col(), u * t.value());
    }
    steps.push_back(Operator::from_triplets(problem.dim(), merged));
  }
  return steps;
}

void propagate_closed(const ControlProblem& problem, const std::vector<Operator>& steps,
                      const Constraint& constraint, TrajectoryBundle& bundle) {
  check_steps(problem, steps);
  const int n = problem.grid.steps;
  const double tau = problem.grid.step_size;
  bundle.steps = n;
  bundle.fwd.assign(size_t(n) + 1, StateVector());
  bundle.bwd.assign(size_t(n) + 1, StateVector());
  TaylorWorkspace ws;

  bundle.fwd[0] = constraint.psi_in;
  for (int j = 1; j <= n; ++j) {
    bundle.fwd[size_t(j)] = bundle.fwd[size_t(j) - 1];
    taylor_apply_inplace(steps[size_t(j) - 1], tau, bundle.fwd[size_t(j)], problem.propagation,
                         PropagationSign::Forward, ws);
  }
  bundle.bwd[size_t(n)] = constraint.psi_out;
  for (int j = n; j >= 1; --j) {
    bundle.bwd[size_t(j) - 1] = bundle.bwd[size_t(j)];
    taylor_apply_inplace(steps[size_t(j) - 1], tau, bundle.bwd[size_t(j) - 1], problem.propagation,
                         PropagationSign::Adjoint, ws);
  }
}

void propagate_closed(const ControlProblem& problem, const Pulse& pulse,
                      const Constraint& constraint, TrajectoryBundle& bundle) {
  propagate_closed(problem, assemble_step_operators(problem, pulse), constraint, bundle);
}

void propagate_fluctuation(const ControlProblem& problem, const std::vector<Operator>& steps,
                           const Constraint& constraint, TrajectoryBundle& bundle) {
  check_steps(problem, steps);
  if (bundle.fwd.empty() || bundle.bwd.empty())
    throw ValidationError("fluctuation propagation requires the closed trajectories");
  const int n = problem.grid.steps;
  const double tau = problem.grid.step_size;
  const int f = problem.num_fluctuations();
  bundle.has_fluctuations = f > 0;
  if (f == 0) return;
  TaylorWorkspace ws;
  StateVector scratch;

  bundle.tilted_fwd.assign(size_t(f), std::vector<StateVector>(size_t(n) + 1));
  bundle.tilted_bwd.assign(size_t(f), std::vector<StateVector>(size_t(n) + 1));
  bundle.tilted_fwd_pre.assign(size_t(f), std::vector<StateVector>(size_t(n) + 1));
  for (int m = 0; m < f; ++m) {
    const Operator& hf = problem.fluctuations[size_t(m)].hamiltonian;
    const Complex tilt = -kImag * tau * problem.fluctuations[size_t(m)].sigma;
    auto& tf = bundle.tilted_fwd[size_t(m)];
    auto& tb = bundle.tilted_bwd[size_t(m)];
    auto& pre = bundle.tilted_fwd_pre[size_t(m)];
    tf[0] = constraint.psi_in;
    for (int j = 1; j <= n; ++j) {
      pre[size_t(j)] = tf[size_t(j) - 1];
      taylor_apply_inplace(steps[size_t(j) - 1], tau, pre[size_t(j)], problem.propagation,
                           PropagationSign::Forward, ws);
      tf[size_t(j)] = pre[size_t(j)];
      add_applied(hf, tf[size_t(j)], tilt, tf[size_t(j)], scratch);
    }
    tb[size_t(n)] = constraint.psi_out;
    for (int j = n; j >= 1; --j) {
      StateVector& prev = tb[size_t(j) - 1];
      prev = tb[size_t(j)];
      add_applied(hf, tb[size_t(j)], -tilt, prev, scratch);  // (I + i tau sigma H_f)
      taylor_apply_inplace(steps[size_t(j) - 1], tau, prev, problem.propagation,
                           PropagationSign::Adjoint, ws);
    }
  }

  // sum over terms of (-i tau sigma_m H_f^m) x
  auto tilt_sum = [&](const StateVector& x, StateVector& out) {
    out.setZero(x.size());
    for (int m = 0; m < f; ++m)
      problem.fluctuations[size_t(m)].hamiltonian.apply_add(
          x, -kImag * tau * problem.fluctuations[size_t(m)].sigma, out);
  };

  bundle.fluct_source_bwd.assign(size_t(n) + 1, StateVector());
  for (int j = 1; j <= n; ++j) {
    // adjoint of the tilt sum applied to the backward state
    StateVector src;
    src.setZero(bundle.bwd[size_t(j)].size());
    for (int m = 0; m < f; ++m)
      problem.fluctuations[size_t(m)].hamiltonian.apply_add(
          bundle.bwd[size_t(j)], kImag * tau * problem.fluctuations[size_t(m)].sigma, src);
    bundle.fluct_source_bwd[size_t(j)] = std::move(src);
  }

  bundle.response_fwd.assign(size_t(n) + 1, StateVector());
  bundle.response_bwd.assign(size_t(n) + 1, StateVector());
  bundle.response_fwd[0] = constraint.psi_in;  // by convention, unused by the identities
  bundle.fluct_source_fwd.assign(size_t(n) + 1, StateVector());
  for (int j = 1; j <= n; ++j) {
    StateVector& tilt_vec = bundle.fluct_source_fwd[size_t(j)];
    tilt_sum(bundle.fwd[size_t(j)], tilt_vec);
    if (j == 1) {
      bundle.response_fwd[1] = tilt_vec;
      continue;
    }
    bundle.response_fwd[size_t(j)] = bundle.response_fwd[size_t(j) - 1];
    taylor_apply_inplace(steps[size_t(j) - 1], tau, bundle.response_fwd[size_t(j)],
                         problem.propagation, PropagationSign::Forward, ws);
    bundle.response_fwd[size_t(j)] += tilt_vec;
  }
  bundle.response_bwd[size_t(n)] = bundle.fluct_source_bwd[size_t(n)];
  for (int j = n - 1; j >= 1; --j) {
    bundle.response_bwd[size_t(j)] = bundle.response_bwd[size_t(j) + 1];
    taylor_apply_inplace(steps[size_t(j)], tau, bundle.response_bwd[size_t(j)],
                         problem.propagation, PropagationSign::Adjoint, ws);
    bundle.response_bwd[size_t(j)] += bundle.fluct_source_bwd[size_t(j)];
  }
  bundle.response_bwd[0] = bundle.response_bwd[1];
  taylor_apply_inplace(steps[0], tau, bundle.response_bwd[0], problem.propagation,
                       PropagationSign::Adjoint, ws);
}

void propagate_fluctuation(const ControlProblem& problem, const Pulse& pulse,
                           const Constraint& constraint, TrajectoryBundle& bundle) {
  propagate_fluctuation(problem, assemble_step_operators(problem, pulse), constraint, bundle);
}

void propagate_decoherence(const ControlProblem& problem, const std::vector<Operator>& steps,
                           const Constraint& constraint, TrajectoryBundle& bundle) {
  check_steps(problem, steps);
  if (bundle.fwd.empty() || bundle.bwd.empty())
    throw ValidationError("decoherence propagation requires the closed trajectories");
  const int v = problem.num_noise();
  if (v == 0) throw ValidationError("decoherence propagation requires at least one noise channel");
  bundle.has_noise = true;
  const int n = problem.grid.steps;
  const double tau = problem.grid.step_size;
  const double inv_sqrt_vn = 1.0 / std::sqrt(double(v) * double(n));
  const double sqrt_vn = std::sqrt(double(v) * double(n));
  TaylorWorkspace ws;
  StateVector lx, llx;

  // xi_m x = x / sqrt(vN) - (sqrt(vN)/2) kappa_m tau L_m^dag (L_m x)
  auto apply_xi = [&](int m, const StateVector& x, StateVector& out) {
    const auto& ch = problem.noise[size_t(m)];
    ch.jump.apply(x, lx);
    ch.jump.apply_adjoint(lx, out);
    out *= -0.5 * sqrt_vn * ch.rate * tau;
    out.noalias() += inv_sqrt_vn * x;
  };

  bundle.jump_overlap.setZero(v, n + 1);
  bundle.nojump_overlap.setZero(v, n + 1);
  for (int j = 1; j <= n; ++j) {
    for (int m = 0; m < v; ++m) {
      const auto& ch = problem.noise[size_t(m)];
      ch.jump.apply(bundle.fwd[size_t(j)], lx);
      bundle.jump_overlap(m, j) = inner(lx, bundle.bwd[size_t(j)]);
      apply_xi(m, bundle.fwd[size_t(j)], llx);
      bundle.nojump_overlap(m, j) = inner(llx, bundle.bwd[size_t(j)]);
    }
  }

  // (l_j + zeta_j) x, coefficients taken from the overlap tables
  auto apply_source = [&](int j, const StateVector& x, StateVector& out) {
    out.setZero(x.size());
    for (int m = 0; m < v; ++m) {
      const auto& ch = problem.noise[size_t(m)];
      ch.jump.apply(x, lx);
      out.noalias() += (ch.rate * tau * bundle.jump_overlap(m, j)) * lx;
      apply_xi(m, x, llx);
      out.noalias() += bundle.nojump_overlap(m, j) * llx;
    }
  };
  auto apply_source_adjoint = [&](int j, const StateVector& x, StateVector& out) {
    out.setZero(x.size());
    for (int m = 0; m < v; ++m) {
      const auto& ch = problem.noise[size_t(m)];
      ch.jump.apply_adjoint(x, lx);
      out.noalias() += (ch.rate * tau * std::conj(bundle.jump_overlap(m, j))) * lx;
      apply_xi(m, x, llx);
      out.noalias() += std::conj(bundle.nojump_overlap(m, j)) * llx;
    }
  };

  bundle.noise_source_bwd.assign(size_t(n) + 1, StateVector());
  for (int j = 1; j <= n; ++j)
    apply_source_adjoint(j, bundle.bwd[size_t(j)], bundle.noise_source_bwd[size_t(j)]);

  bundle.dissipation_fwd.assign(size_t(n) + 1, StateVector());
  bundle.dissipation_bwd.assign(size_t(n) + 1, StateVector());
  bundle.dissipation_fwd[0] = constraint.psi_in;  // by convention, unused by the identities
  bundle.noise_source_fwd.assign(size_t(n) + 1, StateVector());
  for (int j = 1; j <= n; ++j) {
    StateVector& src = bundle.noise_source_fwd[size_t(j)];
    apply_source(j, bundle.fwd[size_t(j)], src);
    if (j == 1) {
      bundle.dissipation_fwd[1] = src;
      continue;
    }
    bundle.dissipation_fwd[size_t(j)] = bundle.dissipation_fwd[size_t(j) - 1];
    taylor_apply_inplace(steps[size_t(j) - 1], tau, bundle.dissipation_fwd[size_t(j)],
                         problem.propagation, PropagationSign::Forward, ws);
    bundle.dissipation_fwd[size_t(j)] += src;
  }
  bundle.dissipation_bwd[size_t(n)] = bundle.noise_source_bwd[size_t(n)];
  for (int j = n - 1; j >= 1; --j) {
    bundle.dissipation_bwd[size_t(j)] = bundle.dissipation_bwd[size_t(j) + 1];
    taylor_apply_inplace(steps[size_t(j)], tau, bundle.dissipation_bwd[size_t(j)],
                         problem.propagation, PropagationSign::Adjoint, ws);
    bundle.dissipation_bwd[size_t(j)] += bundle.noise_source_bwd[size_t(j)];
  }
  bundle.dissipation_bwd[0] = bundle.dissipation_bwd[1];
  taylor_apply_inplace(steps[0], tau, bundle.dissipation_bwd[0], problem.propagation,
                       PropagationSign::Adjoint, ws);
}

void propagate_decoherence(const ControlProblem& problem, const Pulse& pulse,
                           const Constraint& constraint, TrajectoryBundle& bundle) {
  propagate_decoherence(problem, assemble_step_operators(problem, pulse), constraint, bundle);
}

namespace {

void check_index(const TrajectoryBundle& bundle, int j) {
  if (j < 1 || j > bundle.steps) throw ValidationError("trajectory index out of range");
}

}  // namespace

double j_close(const TrajectoryBundle& bundle, int j) {
  check_index(bundle, j);
  const Complex g = inner(bundle.bwd[size_t(j)], bundle.fwd[size_t(j)]);
  return std::norm(g);
}

double j_f(const TrajectoryBundle& bundle, const ControlProblem& problem, int j) {
  check_index(bundle, j);
  if (!bundle.has_fluctuations) return 0.0;
  const int f = problem.num_fluctuations();
  const Complex g = inner(bundle.bwd[size_t(j)], bundle.fwd[size_t(j)]);
  double acc = 0.0;
  for (int m = 0; m < f; ++m) {
    const Complex by =
        inner(bundle.tilted_bwd[size_t(m)][size_t(j)], bundle.tilted_fwd[size_t(m)][size_t(j)]);
    acc += std::norm(by) - std::norm(g);
  }
  const Complex bracket = inner(bundle.bwd[size_t(j)], bundle.response_fwd[size_t(j)]) +
                          inner(bundle.response_bwd[size_t(j)], bundle.fwd[size_t(j)]) -
                          inner(bundle.fluct_source_bwd[size_t(j)], bundle.fwd[size_t(j)]);
  acc -= 2.0 * (bracket * std::conj(g)).real();
  return acc;
}

double j_d(const TrajectoryBundle& bundle, const ControlProblem& problem, int j) {
  check_index(bundle, j);
  if (!bundle.has_noise) return 0.0;
  (void)problem;
  const Complex g = inner(bundle.bwd[size_t(j)], bundle.fwd[size_t(j)]);
  const Complex value = inner(bundle.bwd[size_t(j)], bundle.dissipation_fwd[size_t(j)]) +
                        inner(bundle.dissipation_bwd[size_t(j)], bundle.fwd[size_t(j)]) -
                        inner(bundle.noise_source_bwd[size_t(j)], bundle.fwd[size_t(j)]) -
                        g * std::conj(g);
  if (std::abs(value.imag()) > kJdImagTol) {
    throw NumericalError("decoherence objective has imaginary residue " +
                         std::to_string(value.imag()));
  }
  return value.real();
}

PenaltyResult penalties(const Pulse& pulse, const PenaltyConfig& config) {
  PenaltyResult result;
  result.gradient = RealMatrix::Zero(pulse.steps(), pulse.controls());
  if (!config.enabled) return result;
  const double n = double(pulse.steps());
  const double ha2 = config.amp_threshold * config.amp_threshold;
  const double hd2 = config.step_threshold * config.step_threshold;
  for (int k = 0; k < pulse.controls(); ++k) {
    for (int j = 0; j < pulse.steps(); ++j) {
      const double u = pulse.amplitudes(j, k);
      const double e = std::exp(u * u / ha2);
      result.p_amp += e - 1.0;
      result.gradient(j, k) += (config.amp_scale / n) * e * 2.0 * u / ha2;
    }
    for (int j = 0; j + 1 < pulse.steps(); ++j) {
      const double du = pulse.amplitudes(j + 1, k) - pulse.amplitudes(j, k);
      const double e = std::exp(du * du / hd2);
      result.p_step += e - 1.0;
      const double ge = (config.step_scale / n) * e * 2.0 * du / hd2;
      result.gradient(j + 1, k) += ge;
      result.gradient(j, k) -= ge;
    }
  }
  result.p_amp *= config.amp_scale / n;
  result.p_step *= config.step_scale / n;
  return result;
}

namespace {

// Derivative of (j_close + j_f + j_d) evaluated at index j, where only the
// j-th step operator and its sources depend on u_{c,j}. The single-step
// pieces keep the exact operator ordering, (I + Q_m) Hc on the pre-tilt
// state for the tilted family and Hc applied after the accumulated sources,
// which removes the O(1/N) residue a naive common ordering would leave.
RealMatrix assemble_j_gradient(const ControlProblem& problem, const TrajectoryBundle& bundle,
                               bool open) {
  const int n = bundle.steps;
  const int num_controls = problem.num_controls();
  const int f = problem.num_fluctuations();
  const double tau = problem.grid.step_size;
  const bool fluct = open && bundle.has_fluctuations;
  const bool noise = open && bundle.has_noise;
  RealMatrix grad = RealMatrix::Zero(n, num_controls);
  const Complex itau = kImag * tau;
  StateVector hca, hcz, hcb;
  std::vector<StateVector> untilted_bwd;
  untilted_bwd.resize(size_t(f));

  for (int j = 1; j <= n; ++j) {
    const StateVector& a = bundle.fwd[size_t(j)];
    const StateVector& z = bundle.bwd[size_t(j)];
    const Complex g = inner(z, a);
    const Complex gbar = std::conj(g);
    if (fluct) {
      // (I - Q_m) applied to the tilted backward states, shared across k
      for (int m = 0; m < f; ++m) {
        const auto& term = problem.fluctuations[size_t(m)];
        untilted_bwd[size_t(m)] = bundle.tilted_bwd[size_t(m)][size_t(j)];
        term.hamiltonian.apply_add(bundle.tilted_bwd[size_t(m)][size_t(j)],
                                   kImag * tau * term.sigma, untilted_bwd[size_t(m)]);
      }
    }
    for (int k = 0; k < num_controls; ++k) {
      const Operator& hc = problem.controls[size_t(k)];
      hc.apply(a, hca);
      const Complex zha = inner(z, hca);  // <Z|Hc|A>, controls are hermitian
      Complex total = -itau * zha * gbar;
      if (fluct || noise) hc.apply(z, hcz);
      if (fluct) {
        for (int m = 0; m < f; ++m) {
          const StateVector& b = bundle.tilted_fwd[size_t(m)][size_t(j)];
          const StateVector& y = bundle.tilted_bwd[size_t(m)][size_t(j)];
          const StateVector& pre = bundle.tilted_fwd_pre[size_t(m)][size_t(j)];
          hc.apply(pre, hcb);
          // <Y|(I + Q_m) Hc|pre B> = <(I - Q_m) Y|Hc|pre B>
          total += -itau * inner(untilted_bwd[size_t(m)], hcb) * std::conj(inner(y, b));
          total += itau * zha * gbar;
        }
        const StateVector& c = bundle.response_fwd[size_t(j)];
        const StateVector& x = bundle.response_bwd[size_t(j)];
        const StateVector& qa = bundle.fluct_source_fwd[size_t(j)];
        const StateVector& qz = bundle.fluct_source_bwd[size_t(j)];
        total += itau * inner(hcz, c) * gbar - itau * inner(z, c) * std::conj(zha);
        total += itau * inner(x, hca) * gbar - itau * inner(x, a) * std::conj(zha);
        total += -itau * inner(hcz, qa) * gbar + itau * inner(qz, a) * std::conj(zha);
      }
      if (noise) {
        total += -itau * inner(hcz, bundle.dissipation_fwd[size_t(j)]);
        total += -itau * inner(bundle.dissipation_bwd[size_t(j)], hca);
        total += itau * inner(hcz, bundle.noise_source_fwd[size_t(j)]);
        total += itau * zha * gbar;
      }
      grad(j - 1, k) = 2.0 * total.real();
    }
  }
  return grad;
}

}  // namespace

ObjectiveReport objective_and_gradient(const ControlProblem& problem, const Pulse& pulse,
                                       EvalMode mode) {
  check_pulse(problem, pulse);
  ObjectiveReport report;
  Pulse work = clamp_to_bounds(pulse, problem);
  report.clamped = (work.amplitudes.array() != pulse.amplitudes.array()).any();

  const int n = problem.grid.steps;
  const int num_controls = problem.num_controls();
  const bool open = mode == EvalMode::Open;
  report.j_gradient = RealMatrix::Zero(n, num_controls);
  report.per_constraint.reserve(problem.constraints.size());

  const std::vector<Operator> steps = assemble_step_operators(problem, work);
  for (const auto& constraint : problem.constraints) {
    TrajectoryBundle bundle;
    propagate_closed(problem, steps, constraint, bundle);
    if (open && problem.num_fluctuations() > 0)
      propagate_fluctuation(problem, steps, constraint, bundle);
    if (open && problem.num_noise() > 0) propagate_decoherence(problem, steps, constraint, bundle);

    ConstraintBreakdown piece;
    piece.j_close = j_close(bundle, n);
    piece.j_f = (open && bundle.has_fluctuations) ? j_f(bundle, problem, n) : 0.0;
    piece.j_d = (open && bundle.has_noise) ? j_d(bundle, problem, n) : 0.0;
    piece.j_gradient = assemble_j_gradient(problem, bundle, open);

    report.j_close += constraint.weight * piece.j_close;
    report.j_f += constraint.weight * piece.j_f;
    report.j_d += constraint.weight * piece.j_d;
    report.j_gradient += constraint.weight * piece.j_gradient;
    report.per_constraint.push_back(std::move(piece));
  }

  report.j_open = report.j_close + report.j_f + report.j_d;
  const double j_effective = (mode == EvalMode::Closed) ? report.j_close : report.j_open;
  report.phi_pinned = j_effective <= 0.0;
  const double sq = std::sqrt(std::max(j_effective, 0.0));
  const double prefactor = 1.0 / (2.0 * std::max(sq, kPhiPrefactorFloor));
  report.phi = 1.0 - sq;
  report.gradient = -prefactor * report.j_gradient;

  if (problem.penalties.enabled) {
    const PenaltyResult pr = penalties(work, problem.penalties);
    report.p_amp = pr.p_amp;
    report.p_step = pr.p_step;
    report.phi += pr.p_amp + pr.p_step;
    report.gradient += pr.gradient;
  }
  return report;
}

}  // namespace qoc
