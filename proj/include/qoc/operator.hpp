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
#ifndef QOC_OPERATOR_HPP
#define QOC_OPERATOR_HPP

#include <vector>

#include "qoc/types.hpp"

namespace qoc {

// Largest Hilbert-space dimension the builders will assemble.
inline constexpr Index kMaxOperatorDim = Index{1} << 21;

// Operators at or below this fill ratio are kept in sparse storage.
inline constexpr double kSparseFillThreshold = 0.10;

// Square complex operator with automatic dense/sparse storage selection.
// Immutable after construction; cheap to share by const reference.
class Operator {
 public:
  Operator() = default;

  static Operator from_dense(DenseMatrix m, bool hermitian_hint = false);
  static Operator from_sparse(SparseMatrix m, bool hermitian_hint = false);
  static Operator from_triplets(Index dim, const std::vector<Eigen::Triplet<Complex>>& entries,
                                bool hermitian_hint = false);

  Index dim() const { return dim_; }
  bool is_sparse() const { return sparse_storage_; }
  bool hermitian_hint() const { return hermitian_hint_; }
  Index nonzeros() const;
  double max_abs() const;
  Complex entry(Index i, Index j) const;
  DenseMatrix to_dense() const;
  std::vector<Eigen::Triplet<Complex>> triplets() const;
  Operator adjoint() const;
  Operator scaled(Complex factor) const;

  // max_ij |M(i,j) - conj(M(j,i))| <= tol * max|M|
  bool is_hermitian(double tol = 1e-12) const;

  // out = M x  (resized as needed, no aliasing with x)
  void apply(const StateVector& x, StateVector& out) const;
  StateVector apply(const StateVector& x) const;
  // out = M^dagger x
  void apply_adjoint(const StateVector& x, StateVector& out) const;
  StateVector apply_adjoint(const StateVector& x) const;
  // y += c * (M x)
  void apply_add(const StateVector& x, Complex c, StateVector& y) const;
  // dense matrix forms used by the master-equation integrator
  void apply_left(const DenseMatrix& rho, DenseMatrix& out) const;          // M rho
  void apply_right_adjoint(const DenseMatrix& rho, DenseMatrix& out) const; // rho M^dagger

  void validate_finite(const std::string& label) const;

 private:
  Index dim_ = 0;
  bool sparse_storage_ = false;
  bool hermitian_hint_ = false;
  DenseMatrix dense_;
  SparseMatrix sparse_;
};

// Tensor product; the left factor varies slowest in the combined index.
Operator kron(const Operator& a, const Operator& b);

// Truncated Fock-space ladder operators, a|n> = sqrt(n)|n-1>.
Operator annihilation(Index d);
Operator creation(Index d);
Operator number_operator(Index d);
Operator identity_operator(Index d);
Operator zero_operator(Index d);

// Qubit basis order is (|g>, |e>) with sigma_z|g> = +|g>.
// Minus lowers the excitation, sigma_minus|e> = |g>, sigma_minus|g> = 0.
enum class PauliKind { X, Y, Z, Plus, Minus };
Operator pauli(PauliKind which);

// <bra|ket> = sum_i conj(bra_i) ket_i
Complex inner(const StateVector& bra, const StateVector& ket);

struct PropagationSettings {
  int taylor_order = 20;          // truncation order of the series
  bool unitarity_rescale = true;  // restore the input norm after each step
};

// Residual gate for the truncated series, ||phi_n|| / ||psi||.
inline constexpr double kTaylorResidualTol = 1e-10;

enum class PropagationSign { Forward, Adjoint };  // exp(-i tau H) / exp(+i tau H)

// Real-weighted sum of shared operators; the per-step Hamiltonian
// H_j = H_0 + sum_k u_kj Hc_k is applied term by term, never assembled.
class HamiltonianView {
 public:
  HamiltonianView() = default;
  void clear() { terms_.clear(); }
  void add(double coeff, const Operator* op) { terms_.push_back({coeff, op}); }
  Index dim() const { return terms_.empty() ? 0 : terms_.front().op->dim(); }
  // out = (sum_k c_k M_k) x
  void apply(const StateVector& x, StateVector& out) const;

 private:
  struct Term {
    double coeff;
    const Operator* op;
  };
  std::vector<Term> terms_;
};

struct TaylorWorkspace {
  StateVector term;
  StateVector next;
};

// psi <- sum_{m=0}^{n} phi_m with phi_0 = psi, phi_m = (-/+ i tau / m) H phi_{m-1}.
// Throws NumericalError when the trailing term exceeds kTaylorResidualTol.
void taylor_apply_inplace(const HamiltonianView& h, double tau, StateVector& psi,
                          const PropagationSettings& settings, PropagationSign sign,
                          TaylorWorkspace& ws);
void taylor_apply_inplace(const Operator& h, double tau, StateVector& psi,
                          const PropagationSettings& settings, PropagationSign sign,
                          TaylorWorkspace& ws);

StateVector taylor_apply(const Operator& h, double tau, const StateVector& psi,
                         const PropagationSettings& settings,
                         PropagationSign sign = PropagationSign::Forward);
StateVector taylor_apply(const HamiltonianView& h, double tau, const StateVector& psi,
                         const PropagationSettings& settings,
                         PropagationSign sign = PropagationSign::Forward);

}  // namespace qoc

#endif  // QOC_OPERATOR_HPP
