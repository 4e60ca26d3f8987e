// Test-only reference computations, independent of the library's propagation
// path: dense eigendecomposition exponentials, direct recursion summation,
// and finite differences.
#ifndef QOC_TESTS_ORACLES_HPP
#define QOC_TESTS_ORACLES_HPP

#include <Eigen/Eigenvalues>
#include <random>

#include "qoc/grape.hpp"

namespace oracles {

using qoc::Complex;
using qoc::DenseMatrix;
using qoc::StateVector;

inline double uniform(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1p-53; }

inline DenseMatrix random_hermitian(qoc::Index d, std::mt19937_64& rng, double scale = 1.0) {
  DenseMatrix m(d, d);
  for (qoc::Index i = 0; i < d; ++i)
    for (qoc::Index j = 0; j < d; ++j)
      m(i, j) = Complex(2.0 * uniform(rng) - 1.0, 2.0 * uniform(rng) - 1.0);
  DenseMatrix h = 0.5 * (m + m.adjoint());
  return scale * h;
}

inline DenseMatrix random_matrix(qoc::Index d, std::mt19937_64& rng) {
  DenseMatrix m(d, d);
  for (qoc::Index i = 0; i < d; ++i)
    for (qoc::Index j = 0; j < d; ++j)
      m(i, j) = Complex(2.0 * uniform(rng) - 1.0, 2.0 * uniform(rng) - 1.0);
  return m;
}

inline StateVector random_state(qoc::Index d, std::mt19937_64& rng) {
  StateVector psi(d);
  for (qoc::Index i = 0; i < d; ++i)
    psi(i) = Complex(2.0 * uniform(rng) - 1.0, 2.0 * uniform(rng) - 1.0);
  psi /= psi.norm();
  return psi;
}

// exp(-i tau H) for Hermitian H via eigendecomposition.
inline DenseMatrix expm_hermitian(const DenseMatrix& h, double tau) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(h);
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  Eigen::VectorXcd phases(values.size());
  for (qoc::Index i = 0; i < values.size(); ++i) phases(i) = std::polar(1.0, -tau * values(i));
  return vectors * phases.asDiagonal() * vectors.adjoint();
}

// Dense per-step unitaries of a problem under a pulse.
inline std::vector<DenseMatrix> step_unitaries(const qoc::ControlProblem& problem,
                                               const qoc::Pulse& pulse) {
  std::vector<DenseMatrix> out;
  const DenseMatrix drift = problem.drift.to_dense();
  std::vector<DenseMatrix> controls;
  for (const auto& c : problem.controls) controls.push_back(c.to_dense());
  for (int j = 0; j < problem.grid.steps; ++j) {
    DenseMatrix h = drift;
    for (size_t k = 0; k < controls.size(); ++k) h += pulse.amplitudes(j, int(k)) * controls[k];
    out.push_back(expm_hermitian(h, problem.grid.step_size));
  }
  return out;
}

// U(T) = U_N ... U_1
inline DenseMatrix total_unitary(const qoc::ControlProblem& problem, const qoc::Pulse& pulse) {
  DenseMatrix u = DenseMatrix::Identity(problem.dim(), problem.dim());
  for (const auto& step : step_unitaries(problem, pulse)) u = step * u;
  return u;
}

// Four-index definition of the tensor product.
inline DenseMatrix kron_reference(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (qoc::Index i1 = 0; i1 < a.rows(); ++i1)
    for (qoc::Index j1 = 0; j1 < a.cols(); ++j1)
      for (qoc::Index i2 = 0; i2 < b.rows(); ++i2)
        for (qoc::Index j2 = 0; j2 < b.cols(); ++j2)
          out(i1 * b.rows() + i2, j1 * b.cols() + j2) = a(i1, j1) * b(i2, j2);
  return out;
}

// Direct summation of the first-order response recursion,
// sum_{i<=j} U_{i+1..j} Q A_i with Q = sum_m (-i tau sigma_m Hf_m).
inline StateVector response_reference(const qoc::ControlProblem& problem, const qoc::Pulse& pulse,
                                      const StateVector& psi_in, int upto) {
  const auto steps = step_unitaries(problem, pulse);
  DenseMatrix q = DenseMatrix::Zero(problem.dim(), problem.dim());
  for (const auto& term : problem.fluctuations)
    q += Complex(0.0, -problem.grid.step_size * term.sigma) * term.hamiltonian.to_dense();
  std::vector<StateVector> fwd(size_t(upto) + 1);
  fwd[0] = psi_in;
  for (int j = 1; j <= upto; ++j) fwd[size_t(j)] = steps[size_t(j - 1)] * fwd[size_t(j - 1)];
  StateVector acc = StateVector::Zero(problem.dim());
  for (int i = 1; i <= upto; ++i) {
    StateVector term = q * fwd[size_t(i)];
    for (int j = i + 1; j <= upto; ++j) term = steps[size_t(j - 1)] * term;
    acc += term;
  }
  return acc;
}

// Central finite difference of phi for one pulse entry.
inline double phi_central_difference(const qoc::ControlProblem& problem, const qoc::Pulse& pulse,
                                     qoc::EvalMode mode, int j, int k, double h) {
  qoc::Pulse up = pulse, down = pulse;
  up.amplitudes(j, k) += h;
  down.amplitudes(j, k) -= h;
  const double phi_up = qoc::objective_and_gradient(problem, up, mode).phi;
  const double phi_down = qoc::objective_and_gradient(problem, down, mode).phi;
  return (phi_up - phi_down) / (2.0 * h);
}

}  // namespace oracles

#endif  // QOC_TESTS_ORACLES_HPP
