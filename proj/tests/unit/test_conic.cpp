#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "quantrel/conic.hpp"
#include "quantrel/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace quantrel;

namespace {

RMatrix random_symmetric(int d, std::mt19937& rng) {
  std::normal_distribution<double> g;
  RMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = g(rng);
  return 0.5 * (m + m.transpose());
}

CMatrix random_hermitian(int d, std::mt19937& rng) {
  std::normal_distribution<double> g;
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  return 0.5 * (m + m.adjoint());
}

// min <C, X> s.t. tr X = 1, X >= 0
ConicProgram lambda_min_program(const RMatrix& c) {
  ConicProgram p;
  const int d = static_cast<int>(c.rows());
  const int blk = p.add_psd(d);
  LinExpr tr;
  for (int i = 0; i < d; ++i) {
    tr.push_back({blk, i, i, 1.0});
    p.add_objective({blk, i, i, c(i, i)});
    for (int j = i + 1; j < d; ++j) p.add_objective({blk, i, j, 2.0 * c(i, j)});
  }
  p.add_equality(tr, 1.0);
  return p;
}

}  // namespace

TEST_CASE("LP: min t with t >= 0 and t >= 3") {
  ConicProgram p;
  const int t = p.add_free(1);
  const int sl = p.add_nonneg(2);
  // t - s0 = 0, t - s1 = 3
  p.add_equality({{t, 0, 0, 1.0}, {sl, 0, 0, -1.0}}, 0.0);
  p.add_equality({{t, 0, 0, 1.0}, {sl, 1, 0, -1.0}}, 3.0);
  p.add_objective({t, 0, 0, 1.0});
  const ConicSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.primal_objective == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(std::abs(s.primal_objective - s.dual_objective) < 1e-7);
}

TEST_CASE("SDP: 2x2 Schur condition gives t = 1/4") {
  ConicProgram p;
  const int x = p.add_psd(2);
  p.add_equality({{x, 0, 0, 1.0}}, 1.0);
  p.add_equality({{x, 0, 1, 1.0}}, 0.5);
  p.add_objective({x, 1, 1, 1.0});
  const ConicSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(std::abs(s.primal_objective - 0.25) < 1e-8);
  const ResidualReport r = verify_solution(p, s);
  CHECK(r.ok);
}

TEST_CASE("SDP: minimum eigenvalue of random symmetric matrices") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 5;
    const RMatrix c = random_symmetric(d, rng);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(c);
    const ConicProgram p = lambda_min_program(c);
    const ConicSolution s = solve(p);
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(std::abs(s.primal_objective - es.eigenvalues()(0)) < 1e-7);
    CHECK(s.dual_objective <= s.primal_objective + 1e-10);
    const ResidualReport r = verify_solution(p, s);
    CHECK(r.ok);
    CHECK(r.equality_residual < 1e-8);
  }
}

TEST_CASE("Hermitian embedding: minimum eigenvalue of complex matrices") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 3;
    const CMatrix c = random_hermitian(d, rng);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(c);
    ConicProgram p;
    const HermVar x = add_herm_var(p, d, true);
    p.add_equality(herm_trace(x), 1.0);
    p.add_objective(herm_inner(x, c));
    const ConicSolution s = solve(p);
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(std::abs(s.primal_objective - es.eigenvalues()(0)) < 1e-7);
    const CMatrix xv = herm_value(s, x);
    CHECK(std::abs(xv.trace().real() - 1.0) < 1e-8);
    CHECK(std::abs((c * xv).trace().real() - es.eigenvalues()(0)) < 1e-7);
  }
}

TEST_CASE("Hermitian equality rows and dual matrix") {
  // min t  s.t.  X - t I = -C (X >= 0)  => t = lambda_max(C); dual F is a density matrix.
  std::mt19937 rng(3);
  const CMatrix c = random_hermitian(3, rng);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(c);
  ConicProgram p;
  const HermVar x = add_herm_var(p, 3, true);
  const ScalarVar t = add_scalar(p, BlockKind::free);
  const HermRows rows = add_herm_rows(p, -c, true);
  add_herm_term(p, rows, x, 1.0);
  add_herm_scalar_term(p, rows, t, -CMatrix::Identity(3, 3));
  p.add_objective({t.block, t.index, 0, 1.0});
  const ConicSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(std::abs(s.primal_objective - es.eigenvalues()(2)) < 1e-7);
  const CMatrix f = herm_dual(s, rows);
  // Dual: max Re tr(-C F) ... with F = -rho, tr rho = 1.
  CHECK(std::abs(f.trace().real() + 1.0) < 1e-7);
  CHECK(std::abs((-c * f).trace().real() - es.eigenvalues()(2)) < 1e-7);
}

TEST_CASE("Infeasible program returns a Farkas ray") {
  // X >= 0 with X_00 = -1 is infeasible.
  ConicProgram p;
  const int x = p.add_psd(2);
  p.add_equality({{x, 0, 0, 1.0}}, -1.0);
  p.add_equality({{x, 1, 1, 1.0}}, 1.0);
  const ConicSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::infeasible);
  CHECK(s.ray_violation >= 1e-6);
  const ResidualReport r = verify_solution(p, s);
  CHECK(r.ok);
  CHECK(r.ray_violation >= 1e-6);
}

TEST_CASE("Inconsistent dependent equalities are infeasible") {
  ConicProgram p;
  const int v = p.add_nonneg(2);
  p.add_equality({{v, 0, 0, 1.0}, {v, 1, 0, 1.0}}, 1.0);
  p.add_equality({{v, 0, 0, 2.0}, {v, 1, 0, 2.0}}, 3.0);
  const ConicSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::infeasible);
  CHECK(verify_solution(p, s).ok);
}

TEST_CASE("Redundant equalities are tolerated") {
  ConicProgram p;
  const int v = p.add_nonneg(2);
  p.add_equality({{v, 0, 0, 1.0}, {v, 1, 0, 1.0}}, 1.0);
  p.add_equality({{v, 0, 0, 2.0}, {v, 1, 0, 2.0}}, 2.0);
  p.add_objective({v, 0, 0, 1.0});
  p.add_objective({v, 1, 0, 2.0});
  const ConicSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(std::abs(s.primal_objective - 1.0) < 1e-8);
}

TEST_CASE("Unbounded program is detected") {
  ConicProgram p;
  const int v = p.add_nonneg(2);
  p.add_equality({{v, 0, 0, 1.0}, {v, 1, 0, -1.0}}, 0.0);
  p.add_objective({v, 0, 0, -1.0});
  const ConicSolution s = solve(p);
  CHECK(s.status == SolveStatus::unbounded);
}

TEST_CASE("verify_solution flags a corrupted primal") {
  std::mt19937 rng(5);
  const RMatrix c = random_symmetric(3, rng);
  const ConicProgram p = lambda_min_program(c);
  ConicSolution s = solve(p);
  REQUIRE(s.optimal());
  CHECK(verify_solution(p, s).ok);
  s.primal[0] += 1e-1 * RMatrix::Identity(3, 3);
  const ResidualReport r = verify_solution(p, s);
  CHECK(r.equality_residual >= 1e-4);
  CHECK_FALSE(r.ok);
}

TEST_CASE("Determinism and objective scaling") {
  std::mt19937 rng(9);
  const RMatrix c = random_symmetric(4, rng);
  const ConicSolution a = solve(lambda_min_program(c));
  const ConicSolution b = solve(lambda_min_program(c));
  CHECK(a.primal_objective == b.primal_objective);
  const ConicSolution scaled = solve(lambda_min_program(3.5 * c));
  CHECK(std::abs(scaled.primal_objective - 3.5 * a.primal_objective) < 1e-8);
}

TEST_CASE("Variable cap raises a resource error") {
  ConicProgram p;
  p.add_psd(100);
  Tolerances tol;
  tol.max_variables = 1000;
  CHECK_THROWS_AS(solve(p, tol), ResourceError);
}

TEST_CASE("Program dump lists blocks and coefficients") {
  ConicProgram p;
  const int x = p.add_psd(2);
  p.add_equality({{x, 0, 1, 1.0}}, 0.5);
  const std::string d = p.dump();
  CHECK(d.find("block 0 psd 2") != std::string::npos);
  CHECK(d.find("a 0 0 0 1 1") != std::string::npos);
}
