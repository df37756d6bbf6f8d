#include "quantrel/conic.hpp"

#include "quantrel/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace quantrel {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

int svec_len(int k) { return k * (k + 1) / 2; }

// Lower triangle, column-major: (i, j) with i >= j.
int svec_index(int k, int i, int j) {
  if (i < j) std::swap(i, j);
  return j * k - j * (j - 1) / 2 + (i - j);
}

void smat(const double* v, int k, RMatrix& out) {
  out.resize(k, k);
  int p = 0;
  for (int j = 0; j < k; ++j) {
    out(j, j) = v[p++];
    for (int i = j + 1; i < k; ++i) {
      out(i, j) = out(j, i) = v[p++] / kSqrt2;
    }
  }
}

void svec(const RMatrix& m, double* v) {
  const int k = static_cast<int>(m.rows());
  int p = 0;
  for (int j = 0; j < k; ++j) {
    v[p++] = m(j, j);
    for (int i = j + 1; i < k; ++i) v[p++] = kSqrt2 * 0.5 * (m(i, j) + m(j, i));
  }
}

RMatrix sym(const RMatrix& m) { return 0.5 * (m + m.transpose()); }

// Internal cone: PSD blocks in svec form followed by nonnegative coordinates.
struct Cone {
  std::vector<int> psd_order;
  std::vector<int> psd_offset;
  int nl_offset = 0;
  int nl = 0;
  int n = 0;
  int degree = 0;
};

// Variable map from user blocks to internal columns.
struct ColumnMap {
  std::vector<int> offset;   // first internal column of the block
  std::vector<int> neg;      // free blocks: first column of the negative part, else -1
  std::vector<int> psd_id;   // index into Cone::psd_order, else -1
};

struct Scaling {
  std::vector<RMatrix> r, rinv, w, h;
  std::vector<RVector> lambda;
  RVector lp_w, lp_lambda, lp_h;
};

struct Problem {
  Cone cone;
  ColumnMap map;
  Eigen::SparseMatrix<double> A;  // m x n (column major)
  RVector b, c;
  double c0 = 0;
  std::vector<int> kept_rows;      // original row index per internal row
  RVector row_scale;
};

int map_column(const ConicProgram& p, const ColumnMap& map, const Term& t, double& coef,
               int& neg_col) {
  const BlockSpec& bs = p.blocks()[t.block];
  neg_col = -1;
  if (bs.kind == BlockKind::psd) {
    if (t.row != t.col) coef /= kSqrt2;
    return map.offset[t.block] + svec_index(bs.size, t.row, t.col);
  }
  if (bs.kind == BlockKind::free) neg_col = map.neg[t.block] + t.row;
  return map.offset[t.block] + t.row;
}

Problem build_problem(const ConicProgram& p) {
  Problem pr;
  const auto& blocks = p.blocks();
  pr.map.offset.assign(blocks.size(), 0);
  pr.map.neg.assign(blocks.size(), -1);
  pr.map.psd_id.assign(blocks.size(), -1);
  int col = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].kind != BlockKind::psd) continue;
    pr.map.offset[k] = col;
    pr.map.psd_id[k] = static_cast<int>(pr.cone.psd_order.size());
    pr.cone.psd_order.push_back(blocks[k].size);
    pr.cone.psd_offset.push_back(col);
    pr.cone.degree += blocks[k].size;
    col += svec_len(blocks[k].size);
  }
  pr.cone.nl_offset = col;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].kind == BlockKind::psd) continue;
    pr.map.offset[k] = col;
    col += blocks[k].size;
    if (blocks[k].kind == BlockKind::free) {
      pr.map.neg[k] = col;
      col += blocks[k].size;
    }
  }
  pr.cone.n = col;
  pr.cone.nl = col - pr.cone.nl_offset;
  pr.cone.degree += pr.cone.nl;

  const int m = p.num_rows();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(p.constraint_terms().size() * 2);
  for (const auto& [row, t] : p.constraint_terms()) {
    double coef = t.coef;
    int neg = -1;
    const int c = map_column(p, pr.map, t, coef, neg);
    trip.emplace_back(row, c, coef);
    if (neg >= 0) trip.emplace_back(row, neg, -coef);
  }
  pr.A.resize(m, pr.cone.n);
  pr.A.setFromTriplets(trip.begin(), trip.end());
  pr.A.makeCompressed();
  pr.b = Eigen::Map<const RVector>(p.rhs().data(), m);
  pr.c = RVector::Zero(pr.cone.n);
  for (const Term& t : p.objective()) {
    double coef = t.coef;
    int neg = -1;
    const int c = map_column(p, pr.map, t, coef, neg);
    pr.c(c) += coef;
    if (neg >= 0) pr.c(neg) -= coef;
  }
  pr.c0 = p.objective_constant();
  return pr;
}

// ---------------------------------------------------------------- cone helpers

void identity_point(const Cone& k, RVector& x) {
  x = RVector::Zero(k.n);
  for (std::size_t b = 0; b < k.psd_order.size(); ++b) {
    const int ord = k.psd_order[b];
    for (int j = 0; j < ord; ++j) x(k.psd_offset[b] + svec_index(ord, j, j)) = 1.0;
  }
  x.segment(k.nl_offset, k.nl).setOnes();
}

double min_eig_sym(const RMatrix& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Lower Cholesky factor, falling back to an eigen square root for near-singular input.
RMatrix chol_factor(const RMatrix& m) {
  Eigen::LLT<RMatrix> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(m);
  RVector ev = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

bool compute_scaling(const Cone& k, const RVector& x, const RVector& s, Scaling& sc) {
  const std::size_t nb = k.psd_order.size();
  sc.r.resize(nb);
  sc.rinv.resize(nb);
  sc.w.resize(nb);
  sc.h.resize(nb);
  sc.lambda.resize(nb);
  RMatrix X, S;
  for (std::size_t b = 0; b < nb; ++b) {
    const int ord = k.psd_order[b];
    smat(x.data() + k.psd_offset[b], ord, X);
    smat(s.data() + k.psd_offset[b], ord, S);
    const RMatrix lx = chol_factor(X);
    const RMatrix ls = chol_factor(S);
    Eigen::JacobiSVD<RMatrix> svd(ls.transpose() * lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector lam = svd.singularValues();
    if (!(lam.minCoeff() > 0.0) || !lam.allFinite()) return false;
    const RVector isq = lam.cwiseSqrt().cwiseInverse();
    sc.lambda[b] = lam;
    sc.r[b] = lx * svd.matrixV() * isq.asDiagonal();
    sc.rinv[b] = isq.asDiagonal() * svd.matrixU().transpose() * ls.transpose();
    sc.w[b] = sc.r[b] * sc.r[b].transpose();
    const RMatrix& W = sc.w[b];
    const int len = svec_len(ord);
    RMatrix& H = sc.h[b];
    H.resize(len, len);
    // H = W (x)_s W in the svec basis.
    int p = 0;
    for (int j = 0; j < ord; ++j) {
      for (int i = j; i < ord; ++i, ++p) {
        int q = 0;
        for (int l = 0; l < ord; ++l) {
          for (int kk = l; kk < ord; ++kk, ++q) {
            double v;
            if (i == j && kk == l) {
              v = W(i, kk) * W(i, kk);
            } else if (i == j) {
              v = kSqrt2 * W(i, kk) * W(i, l);
            } else if (kk == l) {
              v = kSqrt2 * W(i, kk) * W(j, kk);
            } else {
              v = W(i, kk) * W(j, l) + W(i, l) * W(j, kk);
            }
            H(p, q) = v;
          }
        }
      }
    }
  }
  const auto xl = x.segment(k.nl_offset, k.nl);
  const auto sl = s.segment(k.nl_offset, k.nl);
  if (k.nl > 0 && !((xl.minCoeff() > 0) && (sl.minCoeff() > 0))) return false;
  sc.lp_h = xl.cwiseQuotient(sl);
  sc.lp_w = sc.lp_h.cwiseSqrt();
  sc.lp_lambda = xl.cwiseProduct(sl).cwiseSqrt();
  return true;
}

// y = H v
void apply_h(const Cone& k, const Scaling& sc, const RVector& v, RVector& y) {
  y.resize(k.n);
  for (std::size_t b = 0; b < k.psd_order.size(); ++b) {
    const int len = svec_len(k.psd_order[b]);
    y.segment(k.psd_offset[b], len) = sc.h[b] * v.segment(k.psd_offset[b], len);
  }
  y.segment(k.nl_offset, k.nl) = sc.lp_h.cwiseProduct(v.segment(k.nl_offset, k.nl));
}

// Scaled complementarity target T = R Z R^T, Z_ij = 2 Tm_ij / (l_i + l_j).
// `tm` holds one symmetric target per PSD block and a vector for the LP part.
void complementarity_rhs(const Cone& k, const Scaling& sc, const std::vector<RMatrix>& tm,
                         const RVector& tm_lp, RVector& t) {
  t.resize(k.n);
  for (std::size_t b = 0; b < k.psd_order.size(); ++b) {
    const RVector& lam = sc.lambda[b];
    const int ord = k.psd_order[b];
    RMatrix z(ord, ord);
    for (int i = 0; i < ord; ++i)
      for (int j = 0; j < ord; ++j) z(i, j) = 2.0 * tm[b](i, j) / (lam(i) + lam(j));
    svec(sc.r[b] * z * sc.r[b].transpose(), t.data() + k.psd_offset[b]);
  }
  t.segment(k.nl_offset, k.nl) =
      sc.lp_w.cwiseProduct(tm_lp.cwiseQuotient(sc.lp_lambda));
}

// Scaled directions dx~ = R^{-1} dX R^{-T}, ds~ = R^T dS R.
void scaled_dirs(const Cone& k, const Scaling& sc, const RVector& dx, const RVector& ds,
                 std::vector<RMatrix>& dxs, std::vector<RMatrix>& dss, RVector& dxl,
                 RVector& dsl) {
  const std::size_t nb = k.psd_order.size();
  dxs.resize(nb);
  dss.resize(nb);
  RMatrix tmp;
  for (std::size_t b = 0; b < nb; ++b) {
    const int ord = k.psd_order[b];
    smat(dx.data() + k.psd_offset[b], ord, tmp);
    dxs[b] = sym(sc.rinv[b] * tmp * sc.rinv[b].transpose());
    smat(ds.data() + k.psd_offset[b], ord, tmp);
    dss[b] = sym(sc.r[b].transpose() * tmp * sc.r[b]);
  }
  dxl = dx.segment(k.nl_offset, k.nl).cwiseQuotient(sc.lp_w);
  dsl = ds.segment(k.nl_offset, k.nl).cwiseProduct(sc.lp_w);
}

// Largest alpha with lambda + alpha d in the cone (scaled coordinates).
double max_step(const Cone& k, const Scaling& sc, const std::vector<RMatrix>& d,
                const RVector& dl) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < k.psd_order.size(); ++b) {
    const RVector isq = sc.lambda[b].cwiseSqrt().cwiseInverse();
    const RMatrix m = isq.asDiagonal() * d[b] * isq.asDiagonal();
    const double e = min_eig_sym(m);
    if (e < 0) alpha = std::min(alpha, -1.0 / e);
  }
  for (int i = 0; i < k.nl; ++i) {
    if (dl(i) < 0) alpha = std::min(alpha, -sc.lp_lambda(i) / dl(i));
  }
  return alpha;
}

// ---------------------------------------------------------------- Schur complement

struct Schur {
  Eigen::LLT<RMatrix> llt;
  RMatrix M;
  double reg = 0.0;
};

void assemble_schur(const Problem& pr, const Scaling& sc, Schur& s) {
  const Cone& k = pr.cone;
  const int m = static_cast<int>(pr.A.rows());
  RMatrix& M = s.M;
  M.setZero(m, m);
  std::vector<int> rows;
  std::vector<int> slot(m, -1);
  RMatrix ab;
  for (std::size_t b = 0; b < k.psd_order.size(); ++b) {
    const int off = k.psd_offset[b];
    const int len = svec_len(k.psd_order[b]);
    rows.clear();
    for (int c = off; c < off + len; ++c) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(pr.A, c); it; ++it) {
        if (slot[it.row()] < 0) {
          slot[it.row()] = static_cast<int>(rows.size());
          rows.push_back(static_cast<int>(it.row()));
        }
      }
    }
    if (rows.empty()) continue;
    ab.setZero(static_cast<Eigen::Index>(rows.size()), len);
    for (int c = off; c < off + len; ++c) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(pr.A, c); it; ++it) {
        ab(slot[it.row()], c - off) = it.value();
      }
    }
    const RMatrix local = ab * sc.h[b] * ab.transpose();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows.size(); ++j) M(rows[i], rows[j]) += local(i, j);
      slot[rows[i]] = -1;
    }
  }
  if (k.nl > 0) {
    const Eigen::SparseMatrix<double> al = pr.A.middleCols(k.nl_offset, k.nl);
    const Eigen::SparseMatrix<double> ah = al * sc.lp_h.asDiagonal();
    const Eigen::SparseMatrix<double> prod = ah * al.transpose();
    M += RMatrix(prod);
  }
  M = sym(M);
  const double scale = std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
  s.reg = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    RMatrix mm = M;
    if (s.reg > 0) mm.diagonal().array() += s.reg * scale;
    s.llt.compute(mm);
    if (s.llt.info() == Eigen::Success) return;
    s.reg = s.reg == 0.0 ? 1e-14 : s.reg * 100.0;
  }
}

RVector schur_solve(const Schur& s, const RVector& rhs) {
  RVector x = s.llt.solve(rhs);
  for (int it = 0; it < 3; ++it) {
    const RVector r = rhs - s.M * x;
    if (r.norm() <= 1e-15 * (1.0 + rhs.norm())) break;
    x += s.llt.solve(r);
  }
  return x;
}

// ---------------------------------------------------------------- preprocessing

struct Presolve {
  std::vector<int> kept;
  bool inconsistent = false;
  RVector farkas;  // over all original rows
  double farkas_violation = 0.0;
};

Presolve drop_dependent_rows(const Eigen::SparseMatrix<double>& A, const RVector& b) {
  Presolve ps;
  const int m = static_cast<int>(A.rows());
  if (m == 0) return ps;
  const RMatrix G = RMatrix(A * A.transpose());
  Eigen::ColPivHouseholderQR<RMatrix> qr(G);
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  std::vector<char> keep(m, 0);
  for (int i = 0; i < rank; ++i) keep[qr.colsPermutation().indices()(i)] = 1;
  for (int i = 0; i < m; ++i) {
    if (keep[i]) ps.kept.push_back(i);
  }
  if (rank == m) return ps;
  // Consistency of the dropped rows: a_d = L a_k  =>  b_d must equal L b_k.
  const int r = rank;
  RMatrix gkk(r, r);
  std::vector<int> dropped;
  for (int i = 0; i < m; ++i) {
    if (!keep[i]) dropped.push_back(i);
  }
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) gkk(i, j) = G(ps.kept[i], ps.kept[j]);
  Eigen::LDLT<RMatrix> ldlt(gkk);
  RVector bk(r);
  for (int i = 0; i < r; ++i) bk(i) = b(ps.kept[i]);
  double worst = 0.0;
  for (int d : dropped) {
    RVector gdk(r);
    for (int i = 0; i < r; ++i) gdk(i) = G(d, ps.kept[i]);
    const RVector l = ldlt.solve(gdk);
    const double mismatch = b(d) - l.dot(bk);
    const double scale = 1.0 + std::abs(b(d)) + l.cwiseAbs().dot(bk.cwiseAbs());
    if (std::abs(mismatch) > 1e-9 * scale && std::abs(mismatch) > worst) {
      worst = std::abs(mismatch);
      ps.inconsistent = true;
      ps.farkas = RVector::Zero(m);
      const double sgn = mismatch > 0 ? 1.0 : -1.0;
      ps.farkas(d) = sgn;
      for (int i = 0; i < r; ++i) ps.farkas(ps.kept[i]) = -sgn * l(i);
      ps.farkas /= ps.farkas.cwiseAbs().maxCoeff();
      ps.farkas_violation = b.dot(ps.farkas);
    }
  }
  return ps;
}

// ---------------------------------------------------------------- unpacking

void unpack_blocks(const ConicProgram& p, const Problem& pr, const RVector& v,
                   std::vector<RMatrix>& out, bool slack) {
  const auto& blocks = p.blocks();
  out.resize(blocks.size());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const int off = pr.map.offset[k];
    const int size = blocks[k].size;
    if (blocks[k].kind == BlockKind::psd) {
      smat(v.data() + off, size, out[k]);
    } else if (blocks[k].kind == BlockKind::nonneg) {
      out[k] = v.segment(off, size);
    } else if (slack) {
      out[k] = v.segment(off, size);
    } else {
      out[k] = v.segment(off, size) - v.segment(pr.map.neg[k], size);
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- ConicProgram

int ConicProgram::add_block(BlockKind kind, int size) {
  if (size < 1) throw ValidationError("conic block size must be >= 1");
  blocks_.push_back({kind, size});
  return static_cast<int>(blocks_.size()) - 1;
}

int ConicProgram::add_row(double rhs) {
  if (!std::isfinite(rhs)) throw ValidationError("equality right-hand side is not finite");
  rhs_.push_back(rhs);
  return static_cast<int>(rhs_.size()) - 1;
}

void ConicProgram::check_term(const Term& t) const {
  if (t.block < 0 || t.block >= static_cast<int>(blocks_.size())) {
    throw DimensionError("term refers to unknown block " + std::to_string(t.block));
  }
  const BlockSpec& b = blocks_[t.block];
  const bool ok = b.kind == BlockKind::psd
                      ? (t.row >= 0 && t.row < b.size && t.col >= 0 && t.col < b.size)
                      : (t.row >= 0 && t.row < b.size && t.col == 0);
  if (!ok) throw DimensionError("term index out of range for block " + std::to_string(t.block));
  if (!std::isfinite(t.coef)) throw ValidationError("term coefficient is not finite");
}

void ConicProgram::add_term(int row, const Term& t) {
  if (row < 0 || row >= num_rows()) throw DimensionError("unknown equality row");
  check_term(t);
  if (t.coef != 0.0) terms_.emplace_back(row, t);
}

int ConicProgram::add_equality(const LinExpr& lhs, double rhs) {
  const int r = add_row(rhs);
  for (const Term& t : lhs) add_term(r, t);
  return r;
}

void ConicProgram::add_objective(const Term& t) {
  check_term(t);
  if (t.coef != 0.0) objective_.push_back(t);
}

void ConicProgram::add_objective(const LinExpr& e) {
  for (const Term& t : e) add_objective(t);
}

std::int64_t ConicProgram::variable_count() const {
  std::int64_t n = 0;
  for (const auto& b : blocks_) {
    n += b.kind == BlockKind::psd ? svec_len(b.size) : (b.kind == BlockKind::free ? 2 : 1) * b.size;
  }
  return n;
}

std::string ConicProgram::dump() const {
  std::ostringstream os;
  os.precision(17);
  os << "# conic program: min c.x + c0 s.t. A x = b\n";
  os << "blocks " << blocks_.size() << "\nrows " << rhs_.size() << "\n";
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const char* kind = blocks_[k].kind == BlockKind::psd      ? "psd"
                       : blocks_[k].kind == BlockKind::nonneg ? "nonneg"
                                                              : "free";
    os << "block " << k << ' ' << kind << ' ' << blocks_[k].size << '\n';
  }
  os << "c0 " << objective_constant_ << '\n';
  for (const Term& t : objective_) {
    os << "c " << t.block << ' ' << t.row << ' ' << t.col << ' ' << t.coef << '\n';
  }
  for (std::size_t r = 0; r < rhs_.size(); ++r) os << "b " << r << ' ' << rhs_[r] << '\n';
  for (const auto& [r, t] : terms_) {
    os << "a " << r << ' ' << t.block << ' ' << t.row << ' ' << t.col << ' ' << t.coef << '\n';
  }
  return os.str();
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

// ---------------------------------------------------------------- solve

ConicSolution solve(const ConicProgram& prog, const Tolerances& tol) {
  if (prog.variable_count() > tol.max_variables) {
    throw ResourceError("conic program has " + std::to_string(prog.variable_count()) +
                        " scalar variables, cap is " + std::to_string(tol.max_variables));
  }
  Problem full = build_problem(prog);
  const int m_all = prog.num_rows();
  ConicSolution sol;

  // Row scaling.
  RVector rs = RVector::Ones(m_all);
  {
    RVector norms = RVector::Zero(m_all);
    for (int c = 0; c < full.A.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(full.A, c); it; ++it)
        norms(it.row()) += it.value() * it.value();
    for (int i = 0; i < m_all; ++i) {
      if (norms(i) > 0) rs(i) = 1.0 / std::sqrt(norms(i));
    }
  }
  for (int i = 0; i < m_all; ++i) {
    if (rs(i) == 1.0 && full.b(i) != 0.0) {
      bool empty = true;
      for (const auto& pr : prog.constraint_terms()) {
        if (pr.first == i) {
          empty = false;
          break;
        }
      }
      if (empty) {
        // 0 = b with b != 0: infeasible.
        sol.status = SolveStatus::infeasible;
        sol.dual = RVector::Zero(m_all);
        sol.dual(i) = full.b(i) > 0 ? 1.0 : -1.0;
        sol.ray_violation = std::abs(full.b(i));
        sol.message = "empty equality row with nonzero right-hand side";
        return sol;
      }
    }
  }
  Eigen::SparseMatrix<double> As = rs.asDiagonal() * full.A;
  RVector bs = rs.cwiseProduct(full.b);

  Presolve ps = drop_dependent_rows(As, bs);
  if (ps.inconsistent) {
    sol.status = SolveStatus::infeasible;
    RVector y = rs.cwiseProduct(ps.farkas);
    y /= y.cwiseAbs().maxCoeff();
    sol.dual = y;
    sol.ray_violation = full.b.dot(y);
    sol.message = "inconsistent linear equalities";
    return sol;
  }

  Problem pr;
  pr.cone = full.cone;
  pr.map = full.map;
  pr.c = full.c;
  pr.c0 = full.c0;
  pr.kept_rows = ps.kept;
  const int m = static_cast<int>(ps.kept.size());
  {
    Eigen::SparseMatrix<double, Eigen::RowMajor> Ar = As;
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m; ++i) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Ar, ps.kept[i]); it; ++it)
        trip.emplace_back(i, static_cast<int>(it.col()), it.value());
    }
    pr.A.resize(m, full.cone.n);
    pr.A.setFromTriplets(trip.begin(), trip.end());
    pr.A.makeCompressed();
    pr.b.resize(m);
    for (int i = 0; i < m; ++i) pr.b(i) = bs(ps.kept[i]);
  }

  const Cone& K = pr.cone;
  const Eigen::SparseMatrix<double> At = pr.A.transpose();
  const RVector& b = pr.b;
  const RVector& c = pr.c;
  RVector rs_kept(m);
  for (int i = 0; i < m; ++i) rs_kept(i) = rs(pr.kept_rows[i]);
  const double bnorm = 1.0 + full.b.lpNorm<Eigen::Infinity>();
  const double cnorm = 1.0 + c.lpNorm<Eigen::Infinity>();

  RVector x, s, y = RVector::Zero(m);
  identity_point(K, x);
  identity_point(K, s);
  double tau = 1.0, kappa = 1.0;

  Scaling sc;
  Schur schur;
  RVector hx, t, tmpv;
  std::vector<RMatrix> tm(K.psd_order.size());
  RVector tm_lp;
  std::vector<RMatrix> dxs, dss;
  RVector dxl, dsl;

  auto solve_newton = [&](double eta, const RVector& rp, const RVector& rd, double rg,
                          const RVector& tvec, double rhs_k, RVector& dx, RVector& dy,
                          RVector& ds, double& dtau, double& dkappa) {
    RVector hrd;
    apply_h(K, sc, rd, hrd);
    const RVector base = tvec + eta * hrd;
    const RVector p = schur_solve(schur, -eta * rp - pr.A * base);
    RVector hc;
    apply_h(K, sc, c, hc);
    const RVector q = schur_solve(schur, pr.A * hc + b);
    RVector hatp, hatq;
    apply_h(K, sc, At * p, hatp);
    apply_h(K, sc, At * q, hatq);
    const RVector dx1 = base + hatp;
    const RVector dx2 = hatq - hc;
    const double num = -eta * rg - b.dot(p) + c.dot(dx1) + rhs_k / tau;
    const double den = b.dot(q) - c.dot(dx2) + kappa / tau;
    dtau = num / den;
    dy = p + dtau * q;
    dx = dx1 + dtau * dx2;
    ds = -eta * rd - At * dy + dtau * c;
    dkappa = (rhs_k - kappa * dtau) / tau;
  };

  SolveStatus status = SolveStatus::numerical_failure;
  int iter = 0;
  double pres = 0, dres = 0, gap_rel = 0;
  RVector best_x = x, best_y = y, best_s = s;
  double best_tau = tau;
  double best_score = std::numeric_limits<double>::infinity();
  double prev_score = best_score;
  int polish = 0;

  for (iter = 0; iter <= tol.max_iter; ++iter) {
    const RVector rp = pr.A * x - b * tau;
    const RVector rd = At * y + s - c * tau;
    const double cx = c.dot(x), by = b.dot(y);
    const double rg = by - cx - kappa;
    const double mu = (x.dot(s) + tau * kappa) / (K.degree + 1);

    pres = (pr.A * (x / tau) - b).cwiseQuotient(rs_kept).lpNorm<Eigen::Infinity>() / bnorm;
    dres = (At * (y / tau) + s / tau - c).lpNorm<Eigen::Infinity>() / cnorm;
    const double pobj = cx / tau, dobj = by / tau;
    gap_rel = std::abs(pobj - dobj) / (1.0 + std::min(std::abs(pobj), std::abs(dobj)));
    if (tol.verbose) {
      std::fprintf(stderr, "%3d pobj %+.10e dobj %+.10e pres %.2e dres %.2e gap %.2e tau %.2e kap %.2e mu %.2e\n",
                   iter, pobj, dobj, pres, dres, gap_rel, tau, kappa, mu);
    }
    const double score = std::max({pres, dres, gap_rel});
    if (score < best_score) {
      best_score = score;
      best_x = x;
      best_y = y;
      best_s = s;
      best_tau = tau;
    }
    if (pres <= tol.feas && dres <= tol.feas && gap_rel <= tol.gap) {
      // Polish for a few more steps while the iterate keeps improving.
      if (status == SolveStatus::optimal && (score >= 0.5 * prev_score || ++polish > 4)) break;
      status = SolveStatus::optimal;
    }
    prev_score = score;
    if (by > 0) {
      const double r = (At * y + s).norm() / by;
      if (r <= tol.infeas && by > 1e-12 * (1.0 + y.norm())) {
        status = SolveStatus::infeasible;
        break;
      }
    }
    if (cx < 0) {
      const double r = (pr.A * x).norm() / (-cx);
      if (r <= tol.infeas) {
        status = SolveStatus::unbounded;
        break;
      }
    }
    if (iter == tol.max_iter) break;

    if (!compute_scaling(K, x, s, sc)) break;
    assemble_schur(pr, sc, schur);
    if (schur.llt.info() != Eigen::Success) break;

    // Predictor.
    for (std::size_t bb = 0; bb < K.psd_order.size(); ++bb) {
      tm[bb] = -RMatrix(sc.lambda[bb].cwiseAbs2().asDiagonal());
    }
    tm_lp = -sc.lp_lambda.cwiseAbs2();
    complementarity_rhs(K, sc, tm, tm_lp, t);
    RVector dx, dy, ds;
    double dtau, dkappa;
    solve_newton(1.0, rp, rd, rg, t, -tau * kappa, dx, dy, ds, dtau, dkappa);
    scaled_dirs(K, sc, dx, ds, dxs, dss, dxl, dsl);
    double amax = std::min(max_step(K, sc, dxs, dxl), max_step(K, sc, dss, dsl));
    if (dtau < 0) amax = std::min(amax, -tau / dtau);
    if (dkappa < 0) amax = std::min(amax, -kappa / dkappa);
    const double alpha_aff = std::min(1.0, amax);
    const double sigma = std::pow(1.0 - alpha_aff, 3);

    // Corrector.
    for (std::size_t bb = 0; bb < K.psd_order.size(); ++bb) {
      const RMatrix lam = sc.lambda[bb].asDiagonal();
      const RMatrix prod = dxs[bb] * dss[bb];
      tm[bb] = sigma * mu * RMatrix::Identity(lam.rows(), lam.cols()) - lam * lam -
               0.5 * (prod + prod.transpose());
    }
    tm_lp = RVector::Constant(K.nl, sigma * mu) - sc.lp_lambda.cwiseAbs2() -
            dxl.cwiseProduct(dsl);
    complementarity_rhs(K, sc, tm, tm_lp, t);
    const double rhs_k = sigma * mu - tau * kappa - dtau * dkappa;
    solve_newton(1.0 - sigma, rp, rd, rg, t, rhs_k, dx, dy, ds, dtau, dkappa);
    scaled_dirs(K, sc, dx, ds, dxs, dss, dxl, dsl);
    amax = std::min(max_step(K, sc, dxs, dxl), max_step(K, sc, dss, dsl));
    if (dtau < 0) amax = std::min(amax, -tau / dtau);
    if (dkappa < 0) amax = std::min(amax, -kappa / dkappa);
    const double alpha = std::min(1.0, 0.99 * amax);
    if (!(alpha > 0) || !std::isfinite(alpha)) break;

    x += alpha * dx;
    y += alpha * dy;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    if (!x.allFinite() || !s.allFinite() || !y.allFinite() || !(tau > 0) || !(kappa > 0)) break;
  }
  sol.iterations = iter;

  // Map back to user blocks and original rows.
  auto dual_full = [&](const RVector& yi) {
    RVector yf = RVector::Zero(m_all);
    for (int i = 0; i < m; ++i) yf(pr.kept_rows[i]) = yi(i) * rs(pr.kept_rows[i]);
    return yf;
  };

  if (status == SolveStatus::infeasible) {
    RVector yf = dual_full(y);
    const double scale = yf.cwiseAbs().maxCoeff();
    yf /= scale;
    sol.status = status;
    sol.dual = yf;
    sol.ray_violation = full.b.dot(yf);
    unpack_blocks(prog, pr, RVector(s / (scale)), sol.slack, true);
    sol.message = "primal infeasible";
    return sol;
  }
  if (status == SolveStatus::unbounded) {
    sol.status = status;
    unpack_blocks(prog, pr, RVector(x / x.cwiseAbs().maxCoeff()), sol.primal, false);
    sol.message = "dual infeasible (primal unbounded)";
    return sol;
  }
  x = best_x;
  y = best_y;
  s = best_s;
  tau = best_tau;
  const RVector xs = x / tau, ys = y / tau, ss = s / tau;
  unpack_blocks(prog, pr, xs, sol.primal, false);
  unpack_blocks(prog, pr, ss, sol.slack, true);
  sol.dual = dual_full(ys);
  sol.primal_objective = c.dot(xs) + pr.c0;
  sol.dual_objective = b.dot(ys) + pr.c0;
  sol.gap = std::abs(sol.primal_objective - sol.dual_objective);
  sol.primal_residual = (pr.A * xs - b).norm() / bnorm;
  sol.dual_residual = (At * ys + ss - c).norm() / cnorm;
  sol.status = status;
  if (status != SolveStatus::optimal) {
    std::ostringstream os;
    os << "no convergence after " << iter << " iterations: primal residual "
       << sol.primal_residual << ", dual residual " << sol.dual_residual << ", gap "
       << sol.gap;
    sol.message = os.str();
  }
  return sol;
}

// ---------------------------------------------------------------- verification

ResidualReport verify_solution(const ConicProgram& p, const ConicSolution& s,
                               const Tolerances& tol) {
  ResidualReport rep;
  const auto& blocks = p.blocks();
  auto value_of = [&](const Term& t) {
    const RMatrix& v = s.primal[t.block];
    return blocks[t.block].kind == BlockKind::psd ? v(t.row, t.col) : v(t.row, 0);
  };
  const int m = p.num_rows();
  if (s.status == SolveStatus::infeasible) {
    // Ray check: -A^T y must lie in K*, b^T y > 0.
    std::vector<RMatrix> aty(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      aty[k] = blocks[k].kind == BlockKind::psd ? RMatrix::Zero(blocks[k].size, blocks[k].size)
                                                 : RMatrix::Zero(blocks[k].size, 1);
    }
    for (const auto& [r, t] : p.constraint_terms()) {
      const double v = t.coef * s.dual(r);
      if (blocks[t.block].kind == BlockKind::psd) {
        if (t.row == t.col) {
          aty[t.block](t.row, t.col) += v;
        } else {
          aty[t.block](t.row, t.col) += 0.5 * v;
          aty[t.block](t.col, t.row) += 0.5 * v;
        }
      } else {
        aty[t.block](t.row, 0) += v;
      }
    }
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      if (blocks[k].kind == BlockKind::psd) {
        margin = std::min(margin, min_eig_sym(RMatrix(-aty[k])));
      } else if (blocks[k].kind == BlockKind::nonneg) {
        margin = std::min(margin, (-aty[k]).minCoeff());
      } else {
        margin = std::min(margin, -aty[k].cwiseAbs().maxCoeff());
      }
    }
    rep.ray_cone_margin = margin;
    double bty = 0;
    for (int r = 0; r < m; ++r) bty += p.rhs()[r] * s.dual(r);
    rep.ray_violation = bty;
    rep.ok = bty >= 1e-6 && margin >= -1e-8;
    return rep;
  }
  if (s.primal.size() != blocks.size()) return rep;
  std::vector<double> lhs(m, 0.0);
  for (const auto& [r, t] : p.constraint_terms()) lhs[r] += t.coef * value_of(t);
  for (int r = 0; r < m; ++r) {
    rep.equality_residual = std::max(rep.equality_residual, std::abs(lhs[r] - p.rhs()[r]));
  }
  double obj = p.objective_constant();
  for (const Term& t : p.objective()) obj += t.coef * value_of(t);
  rep.primal_objective = obj;
  double dobj = p.objective_constant();
  for (int r = 0; r < m; ++r) dobj += p.rhs()[r] * s.dual(r);
  rep.dual_objective = dobj;
  rep.gap = std::abs(obj - dobj);

  // Dual slack recomputed as c - A^T y.
  std::vector<RMatrix> z(blocks.size());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    z[k] = blocks[k].kind == BlockKind::psd ? RMatrix::Zero(blocks[k].size, blocks[k].size)
                                             : RMatrix::Zero(blocks[k].size, 1);
  }
  auto add = [&](const Term& t, double v) {
    if (blocks[t.block].kind == BlockKind::psd) {
      if (t.row == t.col) {
        z[t.block](t.row, t.col) += v;
      } else {
        z[t.block](t.row, t.col) += 0.5 * v;
        z[t.block](t.col, t.row) += 0.5 * v;
      }
    } else {
      z[t.block](t.row, 0) += v;
    }
  };
  for (const Term& t : p.objective()) add(t, t.coef);
  for (const auto& [r, t] : p.constraint_terms()) add(t, -t.coef * s.dual(r));
  double cone = std::numeric_limits<double>::infinity();
  double dcone = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].kind == BlockKind::psd) {
      cone = std::min(cone, min_eig_sym(s.primal[k]));
      dcone = std::min(dcone, min_eig_sym(z[k]));
    } else if (blocks[k].kind == BlockKind::nonneg) {
      cone = std::min(cone, s.primal[k].minCoeff());
      dcone = std::min(dcone, z[k].minCoeff());
    } else {
      rep.dual_residual = std::max(rep.dual_residual, z[k].cwiseAbs().maxCoeff());
    }
  }
  rep.min_cone_margin = std::isfinite(cone) ? cone : 0.0;
  rep.min_dual_cone_margin = std::isfinite(dcone) ? dcone : 0.0;
  const double scale = 1.0 + std::abs(obj);
  rep.ok = rep.equality_residual <= 1e3 * tol.feas && rep.min_cone_margin >= -1e-7 &&
           rep.min_dual_cone_margin >= -1e-7 && rep.gap <= 1e2 * tol.gap * scale &&
           rep.dual_residual <= 1e3 * tol.feas;
  return rep;
}

// ---------------------------------------------------------------- Hermitian modeling

HermVar add_herm_var(ConicProgram& p, int dim, bool complex) {
  HermVar v;
  v.dim = dim;
  v.complex = complex;
  v.block = p.add_psd(complex ? 2 * dim : dim);
  return v;
}

ScalarVar add_scalar(ConicProgram& p, BlockKind kind) {
  return {p.add_block(kind, 1), 0};
}

HermRows add_herm_rows(ConicProgram& p, const CMatrix& rhs, bool complex) {
  HermRows hr;
  hr.dim = static_cast<int>(rhs.rows());
  hr.complex = complex;
  const int d = hr.dim;
  for (int i = 0; i < d; ++i) hr.rows.push_back(p.add_row(rhs(i, i).real()));
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      hr.rows.push_back(p.add_row(kSqrt2 * rhs(i, j).real()));
      if (complex) {
        hr.rows.push_back(p.add_row(kSqrt2 * rhs(i, j).imag()));
      } else if (std::abs(rhs(i, j).imag()) > 1e-12) {
        throw ValidationError("complex right-hand side in a real-field Hermitian equality");
      }
    }
  }
  return hr;
}

void add_herm_term(ConicProgram& p, const HermRows& rows, const HermVar& v, double coef) {
  const int d = rows.dim;
  if (v.dim != d) throw DimensionError("Hermitian term dimension mismatch");
  if (v.complex != rows.complex) throw ValidationError("Hermitian term field mismatch");
  int k = 0;
  for (int i = 0; i < d; ++i, ++k) {
    if (v.complex) {
      p.add_term(rows.rows[k], v.block, i, i, 0.5 * coef);
      p.add_term(rows.rows[k], v.block, i + d, i + d, 0.5 * coef);
    } else {
      p.add_term(rows.rows[k], v.block, i, i, coef);
    }
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      if (v.complex) {
        const double h = 0.5 * kSqrt2 * coef;
        p.add_term(rows.rows[k], v.block, i, j, h);
        p.add_term(rows.rows[k], v.block, i + d, j + d, h);
        ++k;
        p.add_term(rows.rows[k], v.block, i + d, j, h);
        p.add_term(rows.rows[k], v.block, i, j + d, -h);
        ++k;
      } else {
        p.add_term(rows.rows[k], v.block, i, j, kSqrt2 * coef);
        ++k;
      }
    }
  }
}

void add_herm_scalar_term(ConicProgram& p, const HermRows& rows, const ScalarVar& v,
                          const CMatrix& km) {
  const int d = rows.dim;
  if (km.rows() != d || km.cols() != d) throw DimensionError("Hermitian coefficient size mismatch");
  int k = 0;
  for (int i = 0; i < d; ++i, ++k) p.add_term(rows.rows[k], v.block, v.index, 0, km(i, i).real());
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      p.add_term(rows.rows[k++], v.block, v.index, 0, kSqrt2 * km(i, j).real());
      if (rows.complex) {
        p.add_term(rows.rows[k++], v.block, v.index, 0, kSqrt2 * km(i, j).imag());
      } else if (std::abs(km(i, j).imag()) > 1e-12) {
        throw ValidationError("complex coefficient in a real-field Hermitian equality");
      }
    }
  }
}

LinExpr herm_trace(const HermVar& v, double coef) {
  LinExpr e;
  const int ord = v.complex ? 2 * v.dim : v.dim;
  const double f = v.complex ? 0.5 * coef : coef;
  for (int i = 0; i < ord; ++i) e.push_back({v.block, i, i, f});
  return e;
}

LinExpr herm_inner(const HermVar& v, const CMatrix& k) {
  // Re tr(K X) = sum_i K_ii X_ii + 2 sum_{i<j} (Re K_ij Re X_ij + Im K_ij Im X_ij)
  LinExpr e;
  const int d = v.dim;
  for (int i = 0; i < d; ++i) {
    const double kr = k(i, i).real();
    if (v.complex) {
      e.push_back({v.block, i, i, 0.5 * kr});
      e.push_back({v.block, i + d, i + d, 0.5 * kr});
    } else {
      e.push_back({v.block, i, i, kr});
    }
    for (int j = i + 1; j < d; ++j) {
      const double re = k(i, j).real(), im = k(i, j).imag();
      if (v.complex) {
        e.push_back({v.block, i, j, re});
        e.push_back({v.block, i + d, j + d, re});
        e.push_back({v.block, i + d, j, im});
        e.push_back({v.block, i, j + d, -im});
      } else {
        e.push_back({v.block, i, j, 2.0 * re});
      }
    }
  }
  return e;
}

CMatrix herm_value(const ConicSolution& s, const HermVar& v) {
  const RMatrix& x = s.primal.at(v.block);
  const int d = v.dim;
  if (!v.complex) return x.cast<cplx>();
  CMatrix out(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      out(i, j) = cplx(0.5 * (x(i, j) + x(i + d, j + d)), 0.5 * (x(i + d, j) - x(i, j + d)));
    }
  }
  return 0.5 * (out + out.adjoint());
}

double scalar_value(const ConicSolution& s, const ScalarVar& v) {
  return s.primal.at(v.block)(v.index, 0);
}

CMatrix herm_dual(const ConicSolution& s, const HermRows& rows) {
  const int d = rows.dim;
  CMatrix f = CMatrix::Zero(d, d);
  int k = 0;
  for (int i = 0; i < d; ++i) f(i, i) = s.dual(rows.rows[k++]);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double re = s.dual(rows.rows[k++]);
      const double im = rows.complex ? s.dual(rows.rows[k++]) : 0.0;
      f(i, j) = cplx(re, im) / kSqrt2;
      f(j, i) = std::conj(f(i, j));
    }
  }
  return f;
}

}  // namespace quantrel
