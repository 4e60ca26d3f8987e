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
#include "qoc/lindblad.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qoc {

void validate_density(const DensityMatrix& rho, const DensityTolerances& tol,
                      const std::string& context) {
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol.hermiticity)
    throw NumericalError(context + ": density matrix hermiticity violated by " + std::to_string(herm));
  const double trace_err = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (trace_err > tol.trace)
    throw NumericalError(context + ": density matrix trace off by " + std::to_string(trace_err));
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(0.5 * (rho + rho.adjoint()),
                                                    Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < tol.min_eigenvalue)
    throw NumericalError(context + ": density matrix minimum eigenvalue " + std::to_string(min_eig));
}

DensityMatrix pure_density(const StateVector& psi) { return psi * psi.adjoint(); }

namespace {

// Right-hand side of the master equation for one pulse step, with the step
// Hamiltonian assembled into a single operator. Every Hamiltonian term is
// Hermitian, so rho H = (H rho)^dag for Hermitian rho; the dissipator uses
// the same identity, which keeps the output Hermitian by construction.
struct MasterRhs {
  const ControlProblem* problem;
  Operator step_hamiltonian;
  // scratch
  DenseMatrix hrho, lrho, tmp;

  void assemble(const Pulse& pulse, int j, const std::vector<double>& delta_u) {
    std::vector<Eigen::Triplet<Complex>> merged = problem->drift.triplets();
    auto add_scaled = [&merged](const Operator& op, double coeff) {
      if (coeff == 0.0) return;
      for (const auto& t : op.triplets()) merged.emplace_back(t.row(), t.col(), coeff * t.value());
    };
    for (int k = 0; k < problem->num_controls(); ++k)
      add_scaled(problem->controls[size_t(k)], pulse.amplitudes(j - 1, k));
    for (size_t m = 0; m < problem->fluctuations.size(); ++m)
      add_scaled(problem->fluctuations[m].hamiltonian, delta_u[m]);
    step_hamiltonian = Operator::from_triplets(problem->dim(), merged);
  }

  void operator()(const DensityMatrix& rho, DenseMatrix& out) {
    step_hamiltonian.apply_left(rho, hrho);
    // -i (H rho - rho H) with rho H = (H rho)^dag
    out = -kImag * hrho;
    out.noalias() += kImag * hrho.adjoint();
    for (const auto& ch : problem->noise) {
      if (ch.rate == 0.0) continue;
      ch.jump.apply_left(rho, lrho);           // L rho
      ch.jump.apply_right_adjoint(lrho, tmp);  // L rho L^dag
      out.noalias() += ch.rate * tmp;
      adjoint_apply_left(ch.jump, lrho, tmp);  // L^dag L rho
      out.noalias() -= (0.5 * ch.rate) * tmp;
      out.noalias() -= (0.5 * ch.rate) * tmp.adjoint();  // rho L^dag L
    }
  }

  static void adjoint_apply_left(const Operator& op, const DenseMatrix& m, DenseMatrix& out) {
    out.resize(m.rows(), m.cols());
    StateVector col(m.rows()), res(m.rows());
    for (Index c = 0; c < m.cols(); ++c) {
      col = m.col(c);
      op.apply_adjoint(col, res);
      out.col(c) = res;
    }
  }
};

}  // namespace

DensityMatrix evolve_master(const ControlProblem& problem, const Pulse& pulse,
                            const DensityMatrix& rho0, const std::vector<double>& delta_u,
                            int substeps_per_step, bool validate) {
  if (pulse.steps() != problem.grid.steps || pulse.controls() != problem.num_controls())
    throw ValidationError("pulse does not match the problem grid");
  if (rho0.rows() != problem.dim() || rho0.cols() != problem.dim())
    throw ValidationError("density matrix dimension mismatch");
  if (delta_u.size() != problem.fluctuations.size())
    throw ValidationError("expected one amplitude offset per fluctuation term");
  if (substeps_per_step < 1) throw ValidationError("substeps_per_step must be >= 1");

  DensityMatrix rho = rho0;
  const double h = problem.grid.step_size / substeps_per_step;
  MasterRhs rhs;
  rhs.problem = &problem;
  DenseMatrix k1, k2, k3, k4, stage;

  for (int j = 1; j <= problem.grid.steps; ++j) {
    rhs.assemble(pulse, j, delta_u);
    for (int s = 0; s < substeps_per_step; ++s) {
      rhs(rho, k1);
      stage = rho + (0.5 * h) * k1;
      rhs(stage, k2);
      stage = rho + (0.5 * h) * k2;
      rhs(stage, k3);
      stage = rho + h * k3;
      rhs(stage, k4);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  if (validate) validate_density(rho, DensityTolerances{}, "evolve_master");
  return rho;
}

FluctuationScheme fluctuation_scheme_from_string(const std::string& name) {
  if (name == "two_point") return FluctuationScheme::TwoPoint;
  if (name == "full_signs") return FluctuationScheme::FullSigns;
  if (name == "none") return FluctuationScheme::None;
  throw ValidationError("unknown fluctuation scheme '" + name + "'");
}

const char* to_string(FluctuationScheme scheme) {
  switch (scheme) {
    case FluctuationScheme::TwoPoint: return "two_point";
    case FluctuationScheme::FullSigns: return "full_signs";
    case FluctuationScheme::None: return "none";
  }
  return "unknown";
}

namespace {

std::vector<std::vector<double>> ensemble_offsets(const ControlProblem& problem,
                                                  FluctuationScheme scheme) {
  const size_t f = problem.fluctuations.size();
  std::vector<double> sigmas(f);
  bool all_zero = true;
  for (size_t m = 0; m < f; ++m) {
    sigmas[m] = problem.fluctuations[m].sigma;
    if (sigmas[m] != 0.0) all_zero = false;
  }
  if (f == 0 || all_zero || scheme == FluctuationScheme::None)
    return {std::vector<double>(f, 0.0)};
  if (scheme == FluctuationScheme::TwoPoint) {
    std::vector<double> plus = sigmas, minus = sigmas;
    for (auto& x : minus) x = -x;
    return {plus, minus};
  }
  std::vector<std::vector<double>> out;
  const size_t count = size_t(1) << f;
  out.reserve(count);
  for (size_t bits = 0; bits < count; ++bits) {
    std::vector<double> offsets(f);
    for (size_t m = 0; m < f; ++m) offsets[m] = (bits >> m & 1) ? -sigmas[m] : sigmas[m];
    out.push_back(std::move(offsets));
  }
  return out;
}

}  // namespace

int converged_substeps(const ControlProblem& problem, const Pulse& pulse, int initial) {
  constexpr double kTol = 1e-8;
  constexpr int kMaxSubsteps = 256;
  const DensityMatrix rho0 = pure_density(problem.constraints.front().psi_in);
  const std::vector<double> zero_offsets(problem.fluctuations.size(), 0.0);
  int substeps = std::max(initial, 1);
  DensityMatrix coarse = evolve_master(problem, pulse, rho0, zero_offsets, substeps, false);
  while (substeps < kMaxSubsteps) {
    const DensityMatrix fine =
        evolve_master(problem, pulse, rho0, zero_offsets, 2 * substeps, false);
    if ((fine - coarse).cwiseAbs().maxCoeff() < kTol) return substeps;
    substeps *= 2;
    coarse = fine;
  }
  throw NumericalError("master-equation integrator failed to converge below " +
                       std::to_string(kMaxSubsteps) + " substeps per pulse step");
}

EvaluationReport f_open_evaluate(const ControlProblem& problem, const Pulse& pulse,
                                 FluctuationScheme scheme, int initial_substeps,
                                 bool auto_converge) {
  EvaluationReport report;
  report.substeps =
      auto_converge ? converged_substeps(problem, pulse, initial_substeps) : initial_substeps;
  const auto offsets = ensemble_offsets(problem, scheme);
  const double sample_weight = 1.0 / double(offsets.size());
  report.per_constraint.assign(problem.constraints.size(), 0.0);

  for (const auto& du : offsets) {
    FluctuationSample sample;
    sample.offsets = du;
    for (size_t c = 0; c < problem.constraints.size(); ++c) {
      const auto& con = problem.constraints[c];
      const DensityMatrix rho_final =
          evolve_master(problem, pulse, pure_density(con.psi_in), du, report.substeps, true);
      const double fidelity = (con.psi_out.adjoint() * rho_final * con.psi_out)(0, 0).real();
      sample.fidelity += con.weight * fidelity;
      report.per_constraint[c] += sample_weight * fidelity;
    }
    report.f_open += sample_weight * sample.fidelity;
    report.samples.push_back(std::move(sample));
  }
  report.infidelity = 1.0 - std::sqrt(std::max(report.f_open, 0.0));
  return report;
}

ControlProblem scale_noise(const ControlProblem& problem, double s_f, double s_m) {
  if (s_f < 0.0 || s_m < 0.0) throw ValidationError("noise scale factors must be >= 0");
  ControlProblem scaled = problem;
  for (auto& term : scaled.fluctuations) term.sigma *= s_f;
  for (auto& ch : scaled.noise) ch.rate *= s_m;
  return scaled;
}

std::vector<SweepPoint> robustness_sweep(const ControlProblem& problem, const Pulse& pulse,
                                         const std::vector<double>& s_f_list,
                                         const std::vector<double>& s_m_list,
                                         FluctuationScheme scheme) {
  std::vector<double> sf = s_f_list.empty() ? std::vector<double>{1.0} : s_f_list;
  std::vector<double> sm = s_m_list.empty() ? std::vector<double>{1.0} : s_m_list;
  std::sort(sf.begin(), sf.end());
  std::sort(sm.begin(), sm.end());
  std::vector<SweepPoint> out;
  out.reserve(sf.size() * sm.size());
  for (double f : sf) {
    for (double m : sm) {
      const ControlProblem scaled = scale_noise(problem, f, m);
      const EvaluationReport rep = f_open_evaluate(scaled, pulse, scheme);
      out.push_back({f, m, rep.infidelity});
    }
  }
  return out;
}

}  // namespace qoc
