#pragma once

#include "quantrel/operator_algebra.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace quantrel {

enum class BlockKind { psd, nonneg, free };

/// psd: symmetric matrix of order `size`; nonneg/free: `size` scalars.
struct BlockSpec {
  BlockKind kind = BlockKind::nonneg;
  int size = 0;
};

/// Coefficient on one entry of a block. Scalar blocks use row = index and col = 0.
/// For a PSD block the coefficient multiplies the matrix entry X(row, col); since X is
/// symmetric, (i, j) and (j, i) refer to the same value.
struct Term {
  int block = 0;
  int row = 0;
  int col = 0;
  double coef = 0.0;
};

using LinExpr = std::vector<Term>;

/// min <c, x> + c0  s.t.  <a_k, x> = b_k,  x in PSD x R_+ x R blocks.
///
/// Dual: max b^T y + c0  s.t.  c - A^T y in K*.
class ConicProgram {
 public:
  int add_block(BlockKind kind, int size);
  int add_psd(int order) { return add_block(BlockKind::psd, order); }
  int add_nonneg(int count) { return add_block(BlockKind::nonneg, count); }
  int add_free(int count) { return add_block(BlockKind::free, count); }

  /// New equality row with empty left-hand side.
  int add_row(double rhs);
  void add_term(int row, const Term& t);
  void add_term(int row, int block, int i, int j, double coef) { add_term(row, {block, i, j, coef}); }
  int add_equality(const LinExpr& lhs, double rhs);

  void add_objective(const Term& t);
  void add_objective(const LinExpr& e);
  void set_objective_constant(double c) { objective_constant_ = c; }

  const std::vector<BlockSpec>& blocks() const { return blocks_; }
  int num_rows() const { return static_cast<int>(rhs_.size()); }
  const std::vector<double>& rhs() const { return rhs_; }
  const std::vector<std::pair<int, Term>>& constraint_terms() const { return terms_; }
  const LinExpr& objective() const { return objective_; }
  double objective_constant() const { return objective_constant_; }

  /// Scalar variables in svec form (a PSD block of order k counts k(k+1)/2).
  std::int64_t variable_count() const;

  /// Sparse-triplet text dump, one line per coefficient:
  ///   block <id> <psd|nonneg|free> <size>
  ///   c <block> <row> <col> <value>          objective
  ///   b <eq> <value>                          right-hand side
  ///   a <eq> <block> <row> <col> <value>      constraint coefficient
  std::string dump() const;

 private:
  void check_term(const Term& t) const;

  std::vector<BlockSpec> blocks_;
  std::vector<double> rhs_;
  std::vector<std::pair<int, Term>> terms_;
  LinExpr objective_;
  double objective_constant_ = 0.0;
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

std::string to_string(SolveStatus s);

struct Tolerances {
  double feas = 1e-8;
  double gap = 1e-8;
  double infeas = 1e-8;
  int max_iter = 200;
  std::int64_t max_variables = 50'000'000;
  bool verbose = false;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  /// Primal values per block: PSD blocks as order x order matrices, scalar blocks as a column.
  std::vector<RMatrix> primal;
  /// Dual slack c - A^T y per block, same layout as `primal`.
  std::vector<RMatrix> slack;
  /// Multiplier per equality row. For status infeasible this holds a Farkas ray
  /// (A^T y in -K*, b^T y > 0) normalized to max|y| = 1.
  RVector dual;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// b^T y of the Farkas ray when infeasible.
  double ray_violation = 0.0;
  int iterations = 0;
  std::string message;

  double value() const { return primal_objective; }
  bool optimal() const { return status == SolveStatus::optimal; }
};

ConicSolution solve(const ConicProgram& p, const Tolerances& tol = {});

/// Independently recomputed residuals of a solution.
struct ResidualReport {
  double equality_residual = 0.0;   // max_k |<a_k, x> - b_k|
  double dual_residual = 0.0;       // max |c - A^T y - s| over entries
  double min_cone_margin = 0.0;     // smallest eigenvalue / scalar over constrained blocks
  double min_dual_cone_margin = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double ray_violation = 0.0;       // b^T y for an infeasible ray
  double ray_cone_margin = 0.0;     // smallest eigenvalue of -A^T y on the cone
  bool ok = false;
};

ResidualReport verify_solution(const ConicProgram& p, const ConicSolution& s,
                               const Tolerances& tol = {});

// ---------------------------------------------------------------- Hermitian modeling

/// A d x d Hermitian PSD variable. Complex variables live in a real PSD block of order 2d
/// as [[Re, -Im], [Im, Re]]; real variables use an order-d block directly.
struct HermVar {
  int block = -1;
  int dim = 0;
  bool complex = true;
};

HermVar add_herm_var(ConicProgram& p, int dim, bool complex);

/// Scalar variable reference.
struct ScalarVar {
  int block = -1;
  int index = 0;
};

ScalarVar add_scalar(ConicProgram& p, BlockKind kind = BlockKind::nonneg);

/// Row indices of a Hermitian equality: diagonal rows, then for i < j the real row and
/// (complex only) the imaginary row. Off-diagonal rows are scaled by sqrt(2).
struct HermRows {
  int dim = 0;
  bool complex = true;
  std::vector<int> rows;
};

/// Creates the rows of LHS = rhs for a d x d Hermitian right-hand side.
HermRows add_herm_rows(ConicProgram& p, const CMatrix& rhs, bool complex);
/// LHS += coef * X.
void add_herm_term(ConicProgram& p, const HermRows& rows, const HermVar& v, double coef);
/// LHS += v * K.
void add_herm_scalar_term(ConicProgram& p, const HermRows& rows, const ScalarVar& v,
                          const CMatrix& k);

/// Linear expression for tr X.
LinExpr herm_trace(const HermVar& v, double coef = 1.0);
/// Linear expression for Re tr(K X).
LinExpr herm_inner(const HermVar& v, const CMatrix& k);

/// Value of a Hermitian variable in a solution.
CMatrix herm_value(const ConicSolution& s, const HermVar& v);
double scalar_value(const ConicSolution& s, const ScalarVar& v);
/// F such that sum of y over `rows` times the row functionals equals Re tr(F X).
CMatrix herm_dual(const ConicSolution& s, const HermRows& rows);

}  // namespace quantrel
