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
#ifndef QOC_GRAPE_HPP
#define QOC_GRAPE_HPP

#include "qoc/problem.hpp"

namespace qoc {

enum class EvalMode { Closed, Open };

// State trajectories for one constraint. Index j runs over 0..N with
// fwd[0] = psi_in and bwd[N] = psi_out; the objective identities hold for
// any j in 1..N.
//
//   fwd          forward states of the noiseless evolution, U_j applied stepwise
//   bwd          backward-propagated target states
//   tilted_*     per fluctuation term, evolution with the first-order tilt
//                (I -/+ i tau sigma H_f) folded into every step
//   response_*   accumulated first-order response to all fluctuation terms
//   dissipation_* accumulated single-jump and no-jump response of the noise
//
// jump_overlap(m, j)   = <fwd_j | L_m^dag  | bwd_j>
// nojump_overlap(m, j) = <fwd_j | xi_m^dag | bwd_j>,
// with xi_m = I/sqrt(vN) - sqrt(vN)/2 kappa_m tau L_m^dag L_m.
struct TrajectoryBundle {
  std::vector<StateVector> fwd, bwd;
  std::vector<std::vector<StateVector>> tilted_fwd, tilted_bwd;
  std::vector<std::vector<StateVector>> tilted_fwd_pre;  // U_j applied, tilt not yet
  std::vector<StateVector> response_fwd, response_bwd;
  std::vector<StateVector> dissipation_fwd, dissipation_bwd;
  // per-step source vectors kept for the gradient pass
  std::vector<StateVector> fluct_source_fwd;  // sum_m (-i tau sigma_m H_f^m) fwd_j
  std::vector<StateVector> fluct_source_bwd;  // sum_m (+i tau sigma_m H_f^m) bwd_j
  std::vector<StateVector> noise_source_fwd;  // (l_j + zeta_j) fwd_j
  std::vector<StateVector> noise_source_bwd;  // (l_j + zeta_j)^dag bwd_j
  Eigen::MatrixXcd jump_overlap;              // v x (N+1)
  Eigen::MatrixXcd nojump_overlap;            // v x (N+1)
  int steps = 0;
  bool has_fluctuations = false;
  bool has_noise = false;
};

struct ConstraintBreakdown {
  double j_close = 0.0;
  double j_f = 0.0;
  double j_d = 0.0;
  RealMatrix j_gradient;  // d(J_close + J_f + J_d)/du for this constraint
};

struct ObjectiveReport {
  double j_close = 0.0;
  double j_f = 0.0;
  double j_d = 0.0;
  double j_open = 0.0;     // j_close + j_f + j_d
  double phi = 0.0;        // 1 - sqrt(max(j_open, 0)) + penalties
  double p_amp = 0.0;      // P_a
  double p_step = 0.0;     // P_d
  bool phi_pinned = false; // j_open <= 0, objective left the perturbative regime
  bool clamped = false;    // input pulse exceeded the amplitude box
  RealMatrix gradient;     // d(phi)/du, penalties included
  RealMatrix j_gradient;   // constraint-weighted d(j_open)/du
  std::vector<ConstraintBreakdown> per_constraint;
};

// Per-step Hamiltonians H_j = H_0 + sum_k u_kj Hc_k assembled once so every
// trajectory family pays a single fused operator application per step.
std::vector<Operator> assemble_step_operators(const ControlProblem& problem, const Pulse& pulse);

// Fills fwd/bwd: fwd_j = U_j fwd_{j-1}, bwd_{j-1} = U_j^dag bwd_j.
void propagate_closed(const ControlProblem& problem, const Pulse& pulse,
                      const Constraint& constraint, TrajectoryBundle& bundle);
void propagate_closed(const ControlProblem& problem, const std::vector<Operator>& steps,
                      const Constraint& constraint, TrajectoryBundle& bundle);

// Fills the tilted and response families; requires fwd/bwd.
void propagate_fluctuation(const ControlProblem& problem, const Pulse& pulse,
                           const Constraint& constraint, TrajectoryBundle& bundle);
void propagate_fluctuation(const ControlProblem& problem, const std::vector<Operator>& steps,
                           const Constraint& constraint, TrajectoryBundle& bundle);

// Fills the dissipation family and the per-step overlap scalars; requires
// fwd/bwd and at least one noise channel.
void propagate_decoherence(const ControlProblem& problem, const Pulse& pulse,
                           const Constraint& constraint, TrajectoryBundle& bundle);
void propagate_decoherence(const ControlProblem& problem, const std::vector<Operator>& steps,
                           const Constraint& constraint, TrajectoryBundle& bundle);

// Scalar objective pieces evaluated at trajectory index j (1..N).
double j_close(const TrajectoryBundle& bundle, int j);
double j_f(const TrajectoryBundle& bundle, const ControlProblem& problem, int j);
double j_d(const TrajectoryBundle& bundle, const ControlProblem& problem, int j);

struct PenaltyResult {
  double p_amp = 0.0;
  double p_step = 0.0;
  RealMatrix gradient;
};

// P_a = (A_a/N) sum_{j,k} (exp((u/h_a)^2) - 1)
// P_d = (A_d/N) sum_{j,k} (exp((du/h_d)^2) - 1), du adjacent along j.
PenaltyResult penalties(const Pulse& pulse, const PenaltyConfig& config);

// Full objective and analytic gradient for the weighted constraint set.
// Closed mode evaluates only the noiseless piece; open mode adds the
// first-order fluctuation and decoherence corrections.
ObjectiveReport objective_and_gradient(const ControlProblem& problem, const Pulse& pulse,
                                       EvalMode mode);

}  // namespace qoc

#endif  // QOC_GRAPE_HPP
