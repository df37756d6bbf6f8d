#pragma once

#include <Eigen/Dense>

#include <complex>

namespace quantrel {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Dense complex Hermitian matrix.
///
/// Construction symmetrizes the input as (M + M^H)/2 and rejects inputs whose
/// asymmetry max|M - M^H| exceeds the rejection tolerance (1e-8 by default).
/// Values are immutable once built.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(const CMatrix& m, double reject_tol = 1e-8);
  explicit HermitianOperator(const RMatrix& m, double reject_tol = 1e-8);

  static HermitianOperator identity(int d);
  static HermitianOperator zero(int d);
  /// |v><v| for a (not necessarily normalized) vector v.
  static HermitianOperator projector(const CVector& v);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }
  double trace() const { return m_.trace().real(); }
  bool is_real(double tol = 1e-14) const;

  HermitianOperator operator+(const HermitianOperator& o) const;
  HermitianOperator operator-(const HermitianOperator& o) const;
  HermitianOperator operator*(double s) const;
  friend HermitianOperator operator*(double s, const HermitianOperator& h) { return h * s; }
  HermitianOperator& operator+=(const HermitianOperator& o);

  /// U * this * U^H.
  HermitianOperator conjugated(const CMatrix& u) const;

 private:
  struct Unchecked {};
  HermitianOperator(CMatrix m, Unchecked) : m_(std::move(m)) {}
  friend HermitianOperator make_hermitian_unchecked(CMatrix m);

  CMatrix m_;
};

/// Wraps a matrix the caller already knows to be Hermitian; no checks.
HermitianOperator make_hermitian_unchecked(CMatrix m);

/// Eigenvalues ascending with matching eigenvector columns.
struct EigenSystem {
  RVector values;
  CMatrix vectors;
};

EigenSystem eigh(const HermitianOperator& op);
double min_eigenvalue(const HermitianOperator& op);
double max_eigenvalue(const HermitianOperator& op);
bool is_psd(const HermitianOperator& op, double tol = 1e-9);

enum class Subsystem { A, B };

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Partial trace of a (dA*dB)-dimensional operator, keeping subsystem `keep`.
/// Subsystem A is the slow index of the row-major Kronecker convention.
HermitianOperator partial_trace(const HermitianOperator& op, int dA, int dB, Subsystem keep);
CMatrix partial_trace(const CMatrix& op, int dA, int dB, Subsystem keep);

/// Principal square root. Eigenvalues in [-1e-10, 0) are clipped to zero;
/// anything below -1e-10 raises NotPsdError.
HermitianOperator matrix_sqrt(const HermitianOperator& op);

/// Transpose in the orthonormal basis given by the columns of `basis`:
/// U (U^H op U)^T U^H. Raises BasisError if `basis` is not unitary within 1e-10.
HermitianOperator basis_transpose(const HermitianOperator& op, const CMatrix& basis);

HermitianOperator pauli_x();
HermitianOperator pauli_y();
HermitianOperator pauli_z();

double max_abs_diff(const CMatrix& a, const CMatrix& b);

}  // namespace quantrel
