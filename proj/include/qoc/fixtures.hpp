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
#ifndef QOC_FIXTURES_HPP
#define QOC_FIXTURES_HPP

#include "qoc/problem.hpp"

namespace qoc {
namespace fixtures {

// Binomial-code encoding on a 30-level cavity with a transmon ancilla:
// chi/2pi = 1.9 MHz, K2/2pi = 8.46 kHz, sigma_f/2pi = 0.1 MHz on both the
// cavity and qubit frequency shifts, kappa = 10 kHz (cavity) / 50 kHz
// (transmon decay), T = 600 ns over 600 steps, drive box 2pi x 50 MHz.
ControlProblem fig2_encoding();

// fig2_encoding with one noise family removed, for the robustness sweeps.
ControlProblem fig2_fluctuation_only();
ControlProblem fig2_decoherence_only();

// Calibrated-device variants: chi/2pi = 1.00 MHz, K2/2pi = 1.415 kHz,
// tau = 2 ns, qubit decay T1 = 110 us, dephasing T2 = 130 us with
// kappa_phi = 1/T2 - 1/(2 T1), cavity relaxation T1 = 1300 us, and the
// exp((u/h)^2) pulse-shape penalties (h_a = 179 MHz, h_d = 22.4 MHz).
ControlProblem experiment_initialize();
ControlProblem experiment_decode();
ControlProblem experiment_ry_pi();

// Qubit under a transverse fluctuation: H_c = sigma_z/2 bounded by
// 100 rad/us, H_f = sigma_x with sigma_f = 1 rad/us, N = 1000,
// T = 0.18 pi us, target splitting angle phi (default 3 pi / 2).
ControlProblem dd_transverse(double target_angle = 3.0 * 3.14159265358979323846 / 2.0);

// All bundled problems by name; unknown names throw ValidationError.
ControlProblem by_name(const std::string& name);
std::vector<std::string> names();

// Writes every bundled problem as <dir>/<name>.json.
void write_all(const std::string& dir);

}  // namespace fixtures
}  // namespace qoc

#endif  // QOC_FIXTURES_HPP
