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
#include "qoc/operator.hpp"

#include <cmath>

namespace qoc {

namespace {

bool prefer_sparse(Index dim, Index nnz) {
  if (dim == 0) return false;
  const double fill = static_cast<double>(nnz) / (static_cast<double>(dim) * static_cast<double>(dim));
  return fill <= kSparseFillThreshold;
}

void check_square(Index rows, Index cols) {
  if (rows != cols) {
    throw ValidationError("operator must be square, got " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
}

}  // namespace

Operator Operator::from_dense(DenseMatrix m, bool hermitian_hint) {
  check_square(m.rows(), m.cols());
  Index nnz = 0;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != Complex(0.0, 0.0)) ++nnz;
  Operator op;
  op.dim_ = m.rows();
  op.hermitian_hint_ = hermitian_hint;
  if (prefer_sparse(op.dim_, nnz)) {
    op.sparse_storage_ = true;
    op.sparse_ = m.sparseView();
    op.sparse_.makeCompressed();
  } else {
    op.dense_ = std::move(m);
  }
  op.validate_finite("operator");
  if (hermitian_hint && !op.is_hermitian()) {
    throw ValidationError("operator marked hermitian is not hermitian within tolerance");
  }
  return op;
}

Operator Operator::from_sparse(SparseMatrix m, bool hermitian_hint) {
  check_square(m.rows(), m.cols());
  m.makeCompressed();
  Operator op;
  op.dim_ = m.rows();
  op.hermitian_hint_ = hermitian_hint;
  op.sparse_storage_ = true;
  op.sparse_ = std::move(m);
  op.validate_finite("operator");
  if (hermitian_hint && !op.is_hermitian()) {
    throw ValidationError("operator marked hermitian is not hermitian within tolerance");
  }
  return op;
}

Operator Operator::from_triplets(Index dim, const std::vector<Eigen::Triplet<Complex>>& entries,
                                 bool hermitian_hint) {
  if (dim <= 0) throw ValidationError("operator dimension must be positive");
  if (dim > kMaxOperatorDim) {
    throw ValidationError("operator dimension " + std::to_string(dim) +
                          " exceeds the configured maximum " + std::to_string(kMaxOperatorDim));
  }
  SparseMatrix m(dim, dim);
  m.setFromTriplets(entries.begin(), entries.end());
  if (!prefer_sparse(dim, m.nonZeros())) return from_dense(DenseMatrix(m), hermitian_hint);
  return from_sparse(std::move(m), hermitian_hint);
}

Index Operator::nonzeros() const {
  if (sparse_storage_) return sparse_.nonZeros();
  Index nnz = 0;
  for (Index j = 0; j < dense_.cols(); ++j)
    for (Index i = 0; i < dense_.rows(); ++i)
      if (dense_(i, j) != Complex(0.0, 0.0)) ++nnz;
  return nnz;
}

double Operator::max_abs() const {
  if (dim_ == 0) return 0.0;
  if (!sparse_storage_) return dense_.cwiseAbs().maxCoeff();
  double best = 0.0;
  for (Index k = 0; k < sparse_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sparse_, k); it; ++it)
      best = std::max(best, std::abs(it.value()));
  return best;
}

Complex Operator::entry(Index i, Index j) const {
  if (i < 0 || j < 0 || i >= dim_ || j >= dim_) throw ValidationError("operator index out of range");
  return sparse_storage_ ? sparse_.coeff(i, j) : dense_(i, j);
}

DenseMatrix Operator::to_dense() const {
  if (sparse_storage_) return DenseMatrix(sparse_);
  return dense_;
}

std::vector<Eigen::Triplet<Complex>> Operator::triplets() const {
  std::vector<Eigen::Triplet<Complex>> out;
  if (sparse_storage_) {
    out.reserve(size_t(sparse_.nonZeros()));
    for (Index k = 0; k < sparse_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(sparse_, k); it; ++it)
        out.emplace_back(it.row(), it.col(), it.value());
  } else {
    for (Index j = 0; j < dense_.cols(); ++j)
      for (Index i = 0; i < dense_.rows(); ++i)
        if (dense_(i, j) != Complex(0.0, 0.0)) out.emplace_back(i, j, dense_(i, j));
  }
  return out;
}

Operator Operator::adjoint() const {
  if (sparse_storage_) return from_sparse(SparseMatrix(sparse_.adjoint()), hermitian_hint_);
  return from_dense(dense_.adjoint(), hermitian_hint_);
}

Operator Operator::scaled(Complex factor) const {
  const bool keeps_hermitian = hermitian_hint_ && factor.imag() == 0.0;
  if (sparse_storage_) return from_sparse(SparseMatrix(factor * sparse_), keeps_hermitian);
  return from_dense(factor * dense_, keeps_hermitian);
}

bool Operator::is_hermitian(double tol) const {
  const double scale = max_abs();
  if (scale == 0.0) return true;
  double worst = 0.0;
  if (sparse_storage_) {
    for (Index k = 0; k < sparse_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(sparse_, k); it; ++it)
        worst = std::max(worst, std::abs(it.value() - std::conj(sparse_.coeff(it.col(), it.row()))));
  } else {
    worst = (dense_ - dense_.adjoint()).cwiseAbs().maxCoeff();
  }
  return worst <= tol * scale;
}

void Operator::apply(const StateVector& x, StateVector& out) const {
  if (x.size() != dim_) throw ValidationError("operator/state dimension mismatch");
  out.resize(dim_);
  if (sparse_storage_)
    out.noalias() = sparse_ * x;
  else
    out.noalias() = dense_ * x;
}

StateVector Operator::apply(const StateVector& x) const {
  StateVector out;
  apply(x, out);
  return out;
}

void Operator::apply_adjoint(const StateVector& x, StateVector& out) const {
  if (x.size() != dim_) throw ValidationError("operator/state dimension mismatch");
  out.resize(dim_);
  if (sparse_storage_)
    out.noalias() = sparse_.adjoint() * x;
  else
    out.noalias() = dense_.adjoint() * x;
}

StateVector Operator::apply_adjoint(const StateVector& x) const {
  StateVector out;
  apply_adjoint(x, out);
  return out;
}

void Operator::apply_add(const StateVector& x, Complex c, StateVector& y) const {
  if (x.size() != dim_ || y.size() != dim_) throw ValidationError("operator/state dimension mismatch");
  if (sparse_storage_)
    y.noalias() += c * (sparse_ * x);
  else
    y.noalias() += c * (dense_ * x);
}

void Operator::apply_left(const DenseMatrix& rho, DenseMatrix& out) const {
  if (rho.rows() != dim_) throw ValidationError("operator/density dimension mismatch");
  out.resize(dim_, rho.cols());
  if (sparse_storage_)
    out.noalias() = sparse_ * rho;
  else
    out.noalias() = dense_ * rho;
}

void Operator::apply_right_adjoint(const DenseMatrix& rho, DenseMatrix& out) const {
  if (rho.cols() != dim_) throw ValidationError("operator/density dimension mismatch");
  out.resize(rho.rows(), dim_);
  if (sparse_storage_)
    out.noalias() = rho * sparse_.adjoint();
  else
    out.noalias() = rho * dense_.adjoint();
}

void Operator::validate_finite(const std::string& label) const {
  bool ok = true;
  if (sparse_storage_) {
    for (Index k = 0; ok && k < sparse_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(sparse_, k); it; ++it)
        if (!std::isfinite(it.value().real()) || !std::isfinite(it.value().imag())) {
          ok = false;
          break;
        }
  } else {
    ok = dense_.allFinite();
  }
  if (!ok) throw ValidationError(label + ": non-finite entries");
}

Operator kron(const Operator& a, const Operator& b) {
  if (a.dim() == 0 || b.dim() == 0) throw ValidationError("kron of empty operator");
  if (a.dim() > kMaxOperatorDim / b.dim()) {
    throw ValidationError("kron result dimension exceeds the configured maximum " +
                          std::to_string(kMaxOperatorDim));
  }
  const Index db = b.dim();
  const auto ea = a.triplets();
  const auto eb = b.triplets();
  std::vector<Eigen::Triplet<Complex>> entries;
  entries.reserve(ea.size() * eb.size());
  for (const auto& ta : ea)
    for (const auto& tb : eb)
      entries.emplace_back(ta.row() * db + tb.row(), ta.col() * db + tb.col(),
                           ta.value() * tb.value());
  const bool herm = a.hermitian_hint() && b.hermitian_hint();
  return Operator::from_triplets(a.dim() * db, entries, herm);
}

Operator annihilation(Index d) {
  if (d < 2) throw ValidationError("annihilation requires dimension >= 2");
  std::vector<Eigen::Triplet<Complex>> entries;
  entries.reserve(d - 1);
  for (Index n = 1; n < d; ++n) entries.emplace_back(n - 1, n, Complex(std::sqrt(double(n)), 0.0));
  return Operator::from_triplets(d, entries);
}

Operator creation(Index d) { return annihilation(d).adjoint(); }

Operator number_operator(Index d) {
  if (d < 1) throw ValidationError("number operator requires dimension >= 1");
  std::vector<Eigen::Triplet<Complex>> entries;
  for (Index n = 1; n < d; ++n) entries.emplace_back(n, n, Complex(double(n), 0.0));
  return Operator::from_triplets(d, entries, /*hermitian_hint=*/true);
}

Operator identity_operator(Index d) {
  if (d < 1) throw ValidationError("identity requires dimension >= 1");
  std::vector<Eigen::Triplet<Complex>> entries;
  for (Index n = 0; n < d; ++n) entries.emplace_back(n, n, Complex(1.0, 0.0));
  return Operator::from_triplets(d, entries, /*hermitian_hint=*/true);
}

Operator zero_operator(Index d) {
  if (d < 1) throw ValidationError("zero operator requires dimension >= 1");
  return Operator::from_triplets(d, {}, /*hermitian_hint=*/true);
}

Operator pauli(PauliKind which) {
  DenseMatrix m(2, 2);
  m.setZero();
  switch (which) {
    case PauliKind::X:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      return Operator::from_dense(m, true);
    case PauliKind::Y:
      m(0, 1) = Complex(0.0, -1.0);
      m(1, 0) = Complex(0.0, 1.0);
      return Operator::from_dense(m, true);
    case PauliKind::Z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      return Operator::from_dense(m, true);
    case PauliKind::Minus:  // |g><e|
      m(0, 1) = 1.0;
      return Operator::from_dense(m, false);
    case PauliKind::Plus:  // |e><g|
      m(1, 0) = 1.0;
      return Operator::from_dense(m, false);
  }
  throw ValidationError("unknown pauli kind");
}

Complex inner(const StateVector& bra, const StateVector& ket) {
  if (bra.size() != ket.size()) throw ValidationError("inner product dimension mismatch");
  return bra.dot(ket);
}

void HamiltonianView::apply(const StateVector& x, StateVector& out) const {
  if (terms_.empty()) throw ValidationError("empty Hamiltonian");
  out.setZero(x.size());
  for (const auto& t : terms_) t.op->apply_add(x, Complex(t.coeff, 0.0), out);
}

namespace {

template <typename Hamiltonian>
void taylor_core(const Hamiltonian& h, double tau, StateVector& psi,
                 const PropagationSettings& settings, PropagationSign sign, TaylorWorkspace& ws) {
  if (settings.taylor_order < 4) throw ValidationError("taylor_order must be >= 4");
  const double norm_in = psi.norm();
  if (norm_in == 0.0) return;
  const Complex step = (sign == PropagationSign::Forward ? -kImag : kImag) * tau;
  ws.term = psi;
  for (int m = 1; m <= settings.taylor_order; ++m) {
    h.apply(ws.term, ws.next);
    ws.next *= step / double(m);
    ws.term.swap(ws.next);
    psi += ws.term;
  }
  const double residual = ws.term.norm() / norm_in;
  if (residual > kTaylorResidualTol) {
    throw NumericalError("Taylor expansion truncation failure: residual " +
                         std::to_string(residual) + " at order " +
                         std::to_string(settings.taylor_order));
  }
  if (settings.unitarity_rescale) {
    const double norm_out = psi.norm();
    if (norm_out > 0.0) psi *= norm_in / norm_out;
  }
}

}  // namespace

void taylor_apply_inplace(const HamiltonianView& h, double tau, StateVector& psi,
                          const PropagationSettings& settings, PropagationSign sign,
                          TaylorWorkspace& ws) {
  taylor_core(h, tau, psi, settings, sign, ws);
}

void taylor_apply_inplace(const Operator& h, double tau, StateVector& psi,
                          const PropagationSettings& settings, PropagationSign sign,
                          TaylorWorkspace& ws) {
  taylor_core(h, tau, psi, settings, sign, ws);
}

StateVector taylor_apply(const HamiltonianView& h, double tau, const StateVector& psi,
                         const PropagationSettings& settings, PropagationSign sign) {
  if (h.dim() != psi.size()) throw ValidationError("operator/state dimension mismatch");
  StateVector out = psi;
  TaylorWorkspace ws;
  taylor_apply_inplace(h, tau, out, settings, sign, ws);
  return out;
}

StateVector taylor_apply(const Operator& h, double tau, const StateVector& psi,
                         const PropagationSettings& settings, PropagationSign sign) {
  HamiltonianView view;
  view.add(1.0, &h);
  return taylor_apply(view, tau, psi, settings, sign);
}

}  // namespace qoc
