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
#ifndef QOC_PROBLEM_HPP
#define QOC_PROBLEM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "qoc/operator.hpp"

namespace qoc {

struct PulseGrid {
  int steps = 0;           // N
  double step_size = 0.0;  // tau, microseconds
  double total() const { return steps * step_size; }
};

// Piecewise-constant control table, steps x controls, in rad/us.
struct Pulse {
  RealMatrix amplitudes;
  PulseGrid grid;
  int steps() const { return static_cast<int>(amplitudes.rows()); }
  int controls() const { return static_cast<int>(amplitudes.cols()); }
};

struct NoiseChannel {
  Operator jump;      // L_m
  double rate = 0.0;  // kappa_m, 1/us
  std::string label;
};

struct FluctuationTerm {
  Operator hamiltonian;  // H_f^(m), rad/us per unit offset
  double sigma = 0.0;    // std dev of the shot-to-shot amplitude, rad/us
  std::string label;
};

struct Constraint {
  StateVector psi_in;
  StateVector psi_out;
  double weight = 1.0;  // p_j, renormalized so the set sums to 1
};

// exp((u/h)^2)-type pulse-shape penalties; thresholds in rad/us.
struct PenaltyConfig {
  bool enabled = false;
  double amp_scale = 0.1;        // A_a
  double step_scale = 0.1;       // A_d
  double amp_threshold = 0.0;    // h_a
  double step_threshold = 0.0;   // h_d
};

struct ControlProblem {
  Operator drift;
  std::vector<Operator> controls;
  std::vector<double> bounds;  // per-control amplitude box, rad/us
  std::vector<NoiseChannel> noise;
  std::vector<FluctuationTerm> fluctuations;
  std::vector<Constraint> constraints;
  PulseGrid grid;
  PenaltyConfig penalties;
  PropagationSettings propagation;

  Index dim() const { return drift.dim(); }
  int num_controls() const { return static_cast<int>(controls.size()); }
  int num_fluctuations() const { return static_cast<int>(fluctuations.size()); }
  int num_noise() const { return static_cast<int>(noise.size()); }

  // Checks dimensions, hermiticity, rates/sigmas, state norms; renormalizes
  // constraint weights to sum to 1. Returns weak-noise warnings, if any.
  std::vector<std::string> validate();
};

// Weak-noise regime markers, kappa*T > 0.1 or (sigma*T)^2 > 0.1.
std::vector<std::string> weak_noise_warnings(const ControlProblem& p);

enum class DriftForm {
  DispersiveSigmaZ,      // (chi/2) n sigma_z - (K2/2) n(n-1)
  DispersiveExcitedShift // -chi n |e><e|    - (K2/2) n(n-1)
};

struct TransmonCavityParams {
  double chi_mhz = 0.0;      // chi / 2pi
  double kerr_khz = 0.0;     // K2 / 2pi
  Index cavity_dim = 0;
  double max_amp_mhz = 0.0;  // amplitude box for every control, value / 2pi
  DriftForm form = DriftForm::DispersiveExcitedShift;
};

struct SystemOperators {
  Operator drift;
  std::vector<Operator> controls;  // sigma_x, sigma_y, a + a^dag, i(a - a^dag)
  std::vector<double> bounds;
};

// Dispersive qubit-cavity system on the cavity (x) qubit space, i.e. the
// combined index is fock * 2 + qubit. All inputs are plain frequencies and
// get multiplied by 2*pi into rad/us.
SystemOperators build_transmon_cavity(const TransmonCavityParams& params);

// Binomial code words in the cavity Fock basis:
// |0_B> = (|0> + |4>)/sqrt(2), |1_B> = |2>.
enum class BinomialTask { Encode, Initialize, Decode, RyPi };
std::vector<Constraint> binomial_constraints(BinomialTask kind, Index cavity_dim);

// Qubit (x) cavity product state on the cavity (x) qubit index ordering.
StateVector qubit_cavity_state(const StateVector& qubit, const StateVector& cavity);

// Uniform amplitudes in [-scale*bound_k, scale*bound_k], deterministic in seed.
Pulse random_initial_pulse(const ControlProblem& problem, std::uint64_t seed, double scale);

Pulse zero_pulse(const ControlProblem& problem);
Pulse clamp_to_bounds(const Pulse& pulse, const ControlProblem& problem);

// JSON problem files; load applies the unit header, save writes canonical
// angular units (two_pi = false) so numeric fields round-trip bit for bit.
ControlProblem load_problem(const std::string& path);
void save_problem(const ControlProblem& problem, const std::string& path);
ControlProblem parse_problem_json(const std::string& text, const std::string& origin);

// Pulse files: CSV with header "step,u_1,...,u_K" (rad/us), or a JSON
// variant that embeds the grid.
void save_pulse_csv(const Pulse& pulse, const std::string& path,
                    const std::string& manifest_ref = "");
Pulse load_pulse_csv(const std::string& path, const PulseGrid& grid);
void save_pulse_json(const Pulse& pulse, const std::string& path,
                     const std::string& manifest_ref = "");
Pulse load_pulse_json(const std::string& path);

}  // namespace qoc

#endif  // QOC_PROBLEM_HPP
