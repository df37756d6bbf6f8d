#include "quantrel/operator_algebra.hpp"

#include "quantrel/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace quantrel {

HermitianOperator make_hermitian_unchecked(CMatrix m) {
  return HermitianOperator(std::move(m), HermitianOperator::Unchecked{});
}

HermitianOperator::HermitianOperator(const CMatrix& m, double reject_tol) {
  if (m.rows() != m.cols()) {
    throw DimensionError("Hermitian operator must be square, got " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
  }
  const CMatrix adj = m.adjoint();
  const double asym = m.size() == 0 ? 0.0 : (m - adj).cwiseAbs().maxCoeff();
  if (!(asym <= reject_tol)) {
    throw ValidationError("matrix is not Hermitian: max |M - M^H| = " + std::to_string(asym));
  }
  m_ = 0.5 * (m + adj);
}

HermitianOperator::HermitianOperator(const RMatrix& m, double reject_tol)
    : HermitianOperator(CMatrix(m.cast<cplx>()), reject_tol) {}

HermitianOperator HermitianOperator::identity(int d) {
  return make_hermitian_unchecked(CMatrix::Identity(d, d));
}

HermitianOperator HermitianOperator::zero(int d) {
  return make_hermitian_unchecked(CMatrix::Zero(d, d));
}

HermitianOperator HermitianOperator::projector(const CVector& v) {
  return make_hermitian_unchecked(v * v.adjoint());
}

bool HermitianOperator::is_real(double tol) const {
  return m_.size() == 0 || m_.imag().cwiseAbs().maxCoeff() <= tol;
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& o) const {
  if (o.dim() != dim()) throw DimensionError("operator dimensions differ in sum");
  return make_hermitian_unchecked(m_ + o.m_);
}

HermitianOperator HermitianOperator::operator-(const HermitianOperator& o) const {
  if (o.dim() != dim()) throw DimensionError("operator dimensions differ in difference");
  return make_hermitian_unchecked(m_ - o.m_);
}

HermitianOperator HermitianOperator::operator*(double s) const {
  return make_hermitian_unchecked(m_ * s);
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& o) {
  if (m_.size() == 0) {
    m_ = o.m_;
    return *this;
  }
  if (o.dim() != dim()) throw DimensionError("operator dimensions differ in sum");
  m_ += o.m_;
  return *this;
}

HermitianOperator HermitianOperator::conjugated(const CMatrix& u) const {
  if (u.cols() != dim()) throw DimensionError("conjugating matrix has wrong size");
  CMatrix r = u * m_ * u.adjoint();
  return make_hermitian_unchecked(0.5 * (r + r.adjoint()));
}

EigenSystem eigh(const HermitianOperator& op) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(op.matrix());
  return {es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const HermitianOperator& op) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(op.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const HermitianOperator& op) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(op.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(op.dim() - 1);
}

bool is_psd(const HermitianOperator& op, double tol) { return min_eigenvalue(op) >= -tol; }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return r;
}

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  return make_hermitian_unchecked(kron(a.matrix(), b.matrix()));
}

CMatrix partial_trace(const CMatrix& op, int dA, int dB, Subsystem keep) {
  if (op.rows() != dA * dB || op.cols() != dA * dB) {
    throw DimensionError("partial_trace: operator of size " + std::to_string(op.rows()) +
                         " does not match dims (" + std::to_string(dA) + "," +
                         std::to_string(dB) + ")");
  }
  if (keep == Subsystem::B) {
    CMatrix r = CMatrix::Zero(dB, dB);
    for (int i = 0; i < dA; ++i) r += op.block(i * dB, i * dB, dB, dB);
    return r;
  }
  CMatrix r(dA, dA);
  for (int i = 0; i < dA; ++i) {
    for (int j = 0; j < dA; ++j) r(i, j) = op.block(i * dB, j * dB, dB, dB).trace();
  }
  return r;
}

HermitianOperator partial_trace(const HermitianOperator& op, int dA, int dB, Subsystem keep) {
  CMatrix r = partial_trace(op.matrix(), dA, dB, keep);
  return make_hermitian_unchecked(0.5 * (r + r.adjoint()));
}

HermitianOperator matrix_sqrt(const HermitianOperator& op) {
  const EigenSystem es = eigh(op);
  if (op.dim() > 0 && es.values(0) < -1e-10) {
    throw NotPsdError("matrix_sqrt: smallest eigenvalue " + std::to_string(es.values(0)) +
                      " < -1e-10");
  }
  const RVector roots = es.values.cwiseMax(0.0).cwiseSqrt();
  CMatrix r = es.vectors * roots.cast<cplx>().asDiagonal() * es.vectors.adjoint();
  return make_hermitian_unchecked(0.5 * (r + r.adjoint()));
}

HermitianOperator basis_transpose(const HermitianOperator& op, const CMatrix& basis) {
  if (basis.rows() != op.dim() || basis.cols() != op.dim()) {
    throw DimensionError("basis_transpose: basis size does not match operator");
  }
  const CMatrix gram = basis.adjoint() * basis;
  const double err = (gram - CMatrix::Identity(op.dim(), op.dim())).cwiseAbs().maxCoeff();
  if (err > 1e-10) {
    throw BasisError("basis_transpose: basis columns are not orthonormal (error " +
                     std::to_string(err) + ")");
  }
  const CMatrix in_basis = basis.adjoint() * op.matrix() * basis;
  CMatrix r = basis * in_basis.transpose() * basis.adjoint();
  return make_hermitian_unchecked(0.5 * (r + r.adjoint()));
}

HermitianOperator pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return make_hermitian_unchecked(m);
}

HermitianOperator pauli_y() {
  CMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return make_hermitian_unchecked(m);
}

HermitianOperator pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return make_hermitian_unchecked(m);
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

}  // namespace quantrel
