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
#include "qoc/problem.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace qoc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kStateNormTol = 1e-10;
}  // namespace

std::vector<std::string> weak_noise_warnings(const ControlProblem& p) {
  std::vector<std::string> warnings;
  const double total = p.grid.total();
  for (size_t m = 0; m < p.noise.size(); ++m) {
    if (p.noise[m].rate * total > 0.1) {
      warnings.push_back("noise[" + std::to_string(m) + "]: kappa*T = " +
                         std::to_string(p.noise[m].rate * total) +
                         " > 0.1, outside the weak-noise regime");
    }
  }
  for (size_t m = 0; m < p.fluctuations.size(); ++m) {
    const double st = p.fluctuations[m].sigma * total;
    if (st * st > 0.1) {
      warnings.push_back("fluctuations[" + std::to_string(m) + "]: (sigma*T)^2 = " +
                         std::to_string(st * st) + " > 0.1, outside the weak-noise regime");
    }
  }
  return warnings;
}

std::vector<std::string> ControlProblem::validate() {
  const Index d = drift.dim();
  if (d <= 0) throw ValidationError("drift: missing or empty operator");
  if (!drift.is_hermitian()) throw ValidationError("drift: not hermitian");
  if (controls.empty()) throw ValidationError("controls: at least one control is required");
  if (bounds.size() != controls.size())
    throw ValidationError("bounds: expected one amplitude bound per control");
  for (size_t k = 0; k < controls.size(); ++k) {
    if (controls[k].dim() != d)
      throw ValidationError("controls[" + std::to_string(k) + "]: dimension mismatch");
    if (!controls[k].is_hermitian())
      throw ValidationError("controls[" + std::to_string(k) + "]: not hermitian");
    if (!(bounds[k] > 0.0))
      throw ValidationError("bounds[" + std::to_string(k) + "]: must be positive");
  }
  for (size_t m = 0; m < noise.size(); ++m) {
    if (noise[m].jump.dim() != d)
      throw ValidationError("noise[" + std::to_string(m) + "].jump: dimension mismatch");
    if (noise[m].rate < 0.0)
      throw ValidationError("noise[" + std::to_string(m) + "].rate: negative rate");
  }
  for (size_t m = 0; m < fluctuations.size(); ++m) {
    if (fluctuations[m].hamiltonian.dim() != d)
      throw ValidationError("fluctuations[" + std::to_string(m) + "].hamiltonian: dimension mismatch");
    if (!fluctuations[m].hamiltonian.is_hermitian())
      throw ValidationError("fluctuations[" + std::to_string(m) + "].hamiltonian: not hermitian");
    if (fluctuations[m].sigma < 0.0)
      throw ValidationError("fluctuations[" + std::to_string(m) + "].sigma: negative value");
  }
  if (constraints.empty()) throw ValidationError("constraints: at least one constraint is required");
  double weight_sum = 0.0;
  for (size_t c = 0; c < constraints.size(); ++c) {
    auto& con = constraints[c];
    const std::string where = "constraints[" + std::to_string(c) + "]";
    if (con.psi_in.size() != d || con.psi_out.size() != d)
      throw ValidationError(where + ": state dimension mismatch");
    if (std::abs(con.psi_in.norm() - 1.0) > kStateNormTol)
      throw ValidationError(where + ".psi_in: not unit norm");
    if (std::abs(con.psi_out.norm() - 1.0) > kStateNormTol)
      throw ValidationError(where + ".psi_out: not unit norm");
    if (!(con.weight > 0.0) || con.weight > 1.0)
      throw ValidationError(where + ".weight: must lie in (0, 1]");
    weight_sum += con.weight;
  }
  if (weight_sum <= 0.0) throw ValidationError("constraints: weights sum to zero");
  for (auto& con : constraints) con.weight /= weight_sum;
  if (grid.steps < 1) throw ValidationError("grid.steps: must be >= 1");
  if (!(grid.step_size > 0.0)) throw ValidationError("grid.tau_us: must be positive");
  if (penalties.enabled) {
    if (!(penalties.amp_threshold > 0.0))
      throw ValidationError("penalties.h_a: must be positive when enabled");
    if (!(penalties.step_threshold > 0.0))
      throw ValidationError("penalties.h_d: must be positive when enabled");
  }
  if (propagation.taylor_order < 4) throw ValidationError("propagation.taylor_order: must be >= 4");
  return weak_noise_warnings(*this);
}

SystemOperators build_transmon_cavity(const TransmonCavityParams& params) {
  if (params.cavity_dim < 2) throw ValidationError("cavity_dim must be >= 2");
  const Index dc = params.cavity_dim;
  const double chi = kTwoPi * params.chi_mhz;
  const double kerr = kTwoPi * params.kerr_khz * 1e-3;
  const double bound = kTwoPi * params.max_amp_mhz;

  const Operator n_cav = number_operator(dc);
  const Operator id_cav = identity_operator(dc);
  const Operator id_qubit = identity_operator(2);
  const Operator a = annihilation(dc);
  const Operator adag = creation(dc);

  // Cavity self-Kerr n(n-1) = a^dag a^dag a a on the truncated space.
  std::vector<Eigen::Triplet<Complex>> kerr_entries;
  for (Index n = 2; n < dc; ++n)
    kerr_entries.emplace_back(n, n, Complex(double(n) * double(n - 1), 0.0));
  const Operator kerr_cav = Operator::from_triplets(dc, kerr_entries, true);

  Operator qubit_term;
  double qubit_coeff = 0.0;
  if (params.form == DriftForm::DispersiveSigmaZ) {
    qubit_term = pauli(PauliKind::Z);
    qubit_coeff = chi / 2.0;
  } else {
    // |e><e| = sigma_+ sigma_- in the (|g>, |e>) basis
    DenseMatrix excited(2, 2);
    excited.setZero();
    excited(1, 1) = 1.0;
    qubit_term = Operator::from_dense(excited, true);
    qubit_coeff = -chi;
  }

  DenseMatrix drift_dense = qubit_coeff * kron(n_cav, qubit_term).to_dense() -
                            (kerr / 2.0) * kron(kerr_cav, id_qubit).to_dense();
  SystemOperators sys;
  sys.drift = Operator::from_dense(std::move(drift_dense), true);

  sys.controls.push_back(kron(id_cav, pauli(PauliKind::X)));
  sys.controls.push_back(kron(id_cav, pauli(PauliKind::Y)));
  DenseMatrix drive_x = kron(a, id_qubit).to_dense() + kron(adag, id_qubit).to_dense();
  DenseMatrix drive_y = kImag * (kron(a, id_qubit).to_dense() - kron(adag, id_qubit).to_dense());
  sys.controls.push_back(Operator::from_dense(std::move(drive_x), true));
  sys.controls.push_back(Operator::from_dense(std::move(drive_y), true));
  sys.bounds.assign(4, bound);
  return sys;
}

StateVector qubit_cavity_state(const StateVector& qubit, const StateVector& cavity) {
  StateVector out(cavity.size() * qubit.size());
  for (Index n = 0; n < cavity.size(); ++n)
    for (Index q = 0; q < qubit.size(); ++q) out(n * qubit.size() + q) = cavity(n) * qubit(q);
  return out;
}

std::vector<Constraint> binomial_constraints(BinomialTask kind, Index cavity_dim) {
  if (cavity_dim < 5) throw ValidationError("binomial constraints need cavity_dim >= 5 to hold |4>");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  StateVector g(2), e(2), plus(2), minus(2);
  g << 1.0, 0.0;
  e << 0.0, 1.0;
  plus << inv_sqrt2, inv_sqrt2;
  minus << inv_sqrt2, -inv_sqrt2;

  StateVector vac = StateVector::Zero(cavity_dim);
  vac(0) = 1.0;
  StateVector code0 = StateVector::Zero(cavity_dim);  // |0_B>
  code0(0) = inv_sqrt2;
  code0(4) = inv_sqrt2;
  StateVector code1 = StateVector::Zero(cavity_dim);  // |1_B>
  code1(2) = 1.0;
  StateVector code_plus = inv_sqrt2 * (code0 + code1);
  StateVector code_minus = inv_sqrt2 * (code0 - code1);

  std::vector<Constraint> out;
  auto add = [&out](const StateVector& in, const StateVector& target) {
    out.push_back({in, target, 1.0});
  };
  switch (kind) {
    case BinomialTask::Encode:
      add(qubit_cavity_state(g, vac), qubit_cavity_state(g, code1));
      add(qubit_cavity_state(plus, vac), qubit_cavity_state(g, code_plus));
      break;
    case BinomialTask::Initialize:
      add(qubit_cavity_state(g, vac), qubit_cavity_state(e, code_plus));
      break;
    case BinomialTask::Decode:
      add(qubit_cavity_state(e, code_plus), qubit_cavity_state(plus, vac));
      add(qubit_cavity_state(e, code_minus), qubit_cavity_state(minus, vac));
      add(qubit_cavity_state(e, code0), qubit_cavity_state(g, vac));
      add(qubit_cavity_state(e, code1), qubit_cavity_state(e, vac));
      break;
    case BinomialTask::RyPi:
      add(qubit_cavity_state(e, code_plus), qubit_cavity_state(e, code_minus));
      add(qubit_cavity_state(e, code0), qubit_cavity_state(e, code1));
      break;
  }
  const double w = 1.0 / double(out.size());
  for (auto& c : out) c.weight = w;
  return out;
}

Pulse random_initial_pulse(const ControlProblem& problem, std::uint64_t seed, double scale) {
  if (!(scale >= 0.0) || scale > 1.0) throw ValidationError("random pulse scale must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  Pulse pulse;
  pulse.grid = problem.grid;
  pulse.amplitudes.resize(problem.grid.steps, problem.num_controls());
  for (int j = 0; j < problem.grid.steps; ++j) {
    for (int k = 0; k < problem.num_controls(); ++k) {
      // top 53 bits -> [0, 1), identical across standard libraries
      const double u = double(rng() >> 11) * 0x1p-53;
      pulse.amplitudes(j, k) = (2.0 * u - 1.0) * scale * problem.bounds[k];
    }
  }
  return pulse;
}

Pulse zero_pulse(const ControlProblem& problem) {
  Pulse pulse;
  pulse.grid = problem.grid;
  pulse.amplitudes = RealMatrix::Zero(problem.grid.steps, problem.num_controls());
  return pulse;
}

Pulse clamp_to_bounds(const Pulse& pulse, const ControlProblem& problem) {
  Pulse out = pulse;
  for (int k = 0; k < out.controls(); ++k) {
    const double b = problem.bounds[size_t(k)];
    out.amplitudes.col(k) = out.amplitudes.col(k).cwiseMax(-b).cwiseMin(b);
  }
  return out;
}

}  // namespace qoc
