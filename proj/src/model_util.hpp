#pragma once

#include "quantrel/conic.hpp"
#include "quantrel/errors.hpp"
#include "quantrel/scenario.hpp"

#include <limits>
#include <string>
#include <vector>

namespace quantrel::detail {

inline ConicSolution solve_or_throw(const ConicProgram& p, const Tolerances& tol,
                                    const std::string& what) {
  ConicSolution s = solve(p, tol);
  if (s.status == SolveStatus::optimal) return s;
  std::string dump;
  if (p.variable_count() < 200'000) dump = p.dump();
  throw SolverError(what + ": solver returned " + to_string(s.status) +
                        (s.message.empty() ? "" : " (" + s.message + ")"),
                    std::move(dump));
}

/// rows[x][a] for the equality sum(...) = data[x][a].
inline std::vector<std::vector<HermRows>> add_grid_rows(
    ConicProgram& p, const std::vector<std::vector<HermitianOperator>>& data, bool complex) {
  std::vector<std::vector<HermRows>> rows(data.size());
  for (std::size_t x = 0; x < data.size(); ++x)
    for (const auto& op : data[x]) rows[x].push_back(add_herm_rows(p, op.matrix(), complex));
  return rows;
}

/// LHS[x][a] += coef * sum_l D(a|x,l) vars[l].
inline void add_strategy_sum(ConicProgram& p, const std::vector<std::vector<HermRows>>& rows,
                             const std::vector<DeterministicStrategy>& strategies,
                             const std::vector<HermVar>& vars, double coef) {
  for (std::size_t l = 0; l < strategies.size(); ++l) {
    const auto& asg = strategies[l].assignment;
    for (std::size_t x = 0; x < asg.size(); ++x) add_herm_term(p, rows[x][asg[x]], vars[l], coef);
  }
}

inline LinExpr sum_traces(const std::vector<HermVar>& vars, double coef = 1.0) {
  LinExpr e;
  for (const auto& v : vars) {
    const LinExpr t = herm_trace(v, coef);
    e.insert(e.end(), t.begin(), t.end());
  }
  return e;
}

inline HermitianOperator herm_op(const CMatrix& m) { return make_hermitian_unchecked(m); }

inline std::vector<std::vector<HermitianOperator>> grid_duals(
    const ConicSolution& s, const std::vector<std::vector<HermRows>>& rows) {
  std::vector<std::vector<HermitianOperator>> f(rows.size());
  for (std::size_t x = 0; x < rows.size(); ++x)
    for (const auto& r : rows[x]) f[x].push_back(herm_op(herm_dual(s, r)));
  return f;
}

/// max over strategies l of lambda_max(sum_x F[x][l(x)] - shift).
inline double max_strategy_eigenvalue(const std::vector<std::vector<HermitianOperator>>& f,
                                      int outcomes, const CMatrix& shift,
                                      std::int64_t cap) {
  const int m = static_cast<int>(f.size());
  const auto strategies = enumerate_strategies(m, outcomes, cap);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& st : strategies) {
    CMatrix sum = -shift;
    for (int x = 0; x < m; ++x) sum += f[x][st.assignment[x]].matrix();
    best = std::max(best, max_eigenvalue(herm_op(0.5 * (sum + sum.adjoint()))));
  }
  return best;
}

}  // namespace quantrel::detail
