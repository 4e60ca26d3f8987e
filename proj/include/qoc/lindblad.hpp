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
#ifndef QOC_LINDBLAD_HPP
#define QOC_LINDBLAD_HPP

#include "qoc/problem.hpp"

namespace qoc {

using DensityMatrix = DenseMatrix;

// Hermiticity / unit-trace / positivity gates for integrator output.
struct DensityTolerances {
  double hermiticity = 1e-10;
  double trace = 1e-9;
  double min_eigenvalue = -1e-8;
};

// Throws NumericalError when rho violates the tolerances (never repairs).
void validate_density(const DensityMatrix& rho, const DensityTolerances& tol,
                      const std::string& context);

DensityMatrix pure_density(const StateVector& psi);

// Integrates d rho / dt = -i[H(t) + sum_m delta_u_m Hf_m, rho] + dissipator
// with the pulse piecewise constant per step and fixed-substep classical RK4
// inside each step. delta_u holds one amplitude offset per fluctuation term.
DensityMatrix evolve_master(const ControlProblem& problem, const Pulse& pulse,
                            const DensityMatrix& rho0, const std::vector<double>& delta_u,
                            int substeps_per_step = 4, bool validate = true);

enum class FluctuationScheme { TwoPoint, FullSigns, None };
FluctuationScheme fluctuation_scheme_from_string(const std::string& name);
const char* to_string(FluctuationScheme scheme);

struct FluctuationSample {
  std::vector<double> offsets;
  double fidelity = 0.0;  // constraint-weighted
};

struct EvaluationReport {
  double f_open = 0.0;
  double infidelity = 0.0;  // 1 - sqrt(f_open)
  std::vector<double> per_constraint;  // ensemble-averaged fidelity per constraint
  std::vector<FluctuationSample> samples;
  int substeps = 0;
};

// Smallest substep count, from `initial` upward, at which halving the step
// changes a probe integration by less than 1e-8 per entry.
int converged_substeps(const ControlProblem& problem, const Pulse& pulse, int initial = 4);

// Constraint-weighted final-state fidelity under the full master equation,
// averaged over the fluctuation ensemble. TwoPoint runs the two all-(+sigma)
// and all-(-sigma) sign assignments; FullSigns runs every assignment.
// With auto_converge the substep count is raised from initial_substeps via
// converged_substeps; otherwise initial_substeps is used as given.
EvaluationReport f_open_evaluate(const ControlProblem& problem, const Pulse& pulse,
                                 FluctuationScheme scheme = FluctuationScheme::TwoPoint,
                                 int initial_substeps = 4, bool auto_converge = true);

// Problem copy with sigma -> s_f * sigma and kappa -> s_m * kappa.
ControlProblem scale_noise(const ControlProblem& problem, double s_f, double s_m);

struct SweepPoint {
  double s_f = 0.0;
  double s_m = 0.0;
  double infidelity = 0.0;
};

// Infidelity over the (s_f, s_m) grid, rows ordered by (s_f, s_m).
std::vector<SweepPoint> robustness_sweep(const ControlProblem& problem, const Pulse& pulse,
                                         const std::vector<double>& s_f_list,
                                         const std::vector<double>& s_m_list,
                                         FluctuationScheme scheme = FluctuationScheme::TwoPoint);

}  // namespace qoc

#endif  // QOC_LINDBLAD_HPP
