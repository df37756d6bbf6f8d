#include "quantrel/nonlocality.hpp"

#include "model_util.hpp"
#include "quantrel/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace quantrel {

std::string to_string(NonlocalityKind k) {
  switch (k) {
    case NonlocalityKind::NLR: return "NLR";
    case NonlocalityKind::NLR_mar: return "NLR_mar";
    case NonlocalityKind::NLR_lhv: return "NLR_lhv";
    case NonlocalityKind::NLW: return "NLW";
    case NonlocalityKind::NLR_c: return "NLR_c";
    case NonlocalityKind::NLR_c_lhv: return "NLR_c_lhv";
    case NonlocalityKind::NLW_c: return "NLW_c";
  }
  return "?";
}

NonlocalityKind parse_nonlocality_kind(const std::string& s) {
  for (auto k : {NonlocalityKind::NLR, NonlocalityKind::NLR_mar, NonlocalityKind::NLR_lhv,
                 NonlocalityKind::NLW, NonlocalityKind::NLR_c, NonlocalityKind::NLR_c_lhv,
                 NonlocalityKind::NLW_c}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown nonlocality kind '" + s +
                        "' (NLR, NLR_mar, NLR_lhv, NLW, NLR_c, NLR_c_lhv, NLW_c)");
}

bool is_lp_exact(NonlocalityKind k) {
  return k == NonlocalityKind::NLR_mar || k == NonlocalityKind::NLR_lhv ||
         k == NonlocalityKind::NLR_c_lhv;
}

LocalModel NonlocalityResult::local_model(const Behaviour& b) const {
  LocalModel m{b.inputs_a(), b.outcomes_a(), b.inputs_b(), b.outcomes_b(), local_scaled};
  const double total = local_scaled.sum();
  if (total > 0) m.weights /= total;
  return m;
}

NonlocalityResult nonlocality_quantifier(const Behaviour& beh, NonlocalityKind kind,
                                         const NonlocalityOptions& opt) {
  if (beh.signalling()) {
    throw SignallingError("nonlocality quantifiers need a no-signalling behaviour");
  }
  const int mA = beh.inputs_a(), nA = beh.outcomes_a(), mB = beh.inputs_b(),
            nB = beh.outcomes_b();
  const std::int64_t NA = strategy_count(mA, nA, opt.strategy_cap);
  const std::int64_t NB = strategy_count(mB, nB, opt.strategy_cap);
  if (NA * NB > opt.strategy_cap) {
    throw ResourceError("strategy pairs " + std::to_string(NA * NB) + " exceed cap " +
                        std::to_string(opt.strategy_cap));
  }
  const auto sa = enumerate_strategies(mA, nA, opt.strategy_cap);
  const auto sb = enumerate_strategies(mB, nB, opt.strategy_cap);
  const bool alice_pinned = opt.pinned == Party::alice;
  const auto pinned_marg = behaviour_marginal(beh, opt.pinned);
  const int mP = alice_pinned ? mA : mB, nP = alice_pinned ? nA : nB;

  const bool weight = kind == NonlocalityKind::NLW || kind == NonlocalityKind::NLW_c;
  const bool npa = !is_lp_exact(kind);
  const bool lhv = kind == NonlocalityKind::NLR_lhv || kind == NonlocalityKind::NLR_c_lhv;
  const bool consistent = kind == NonlocalityKind::NLR_c || kind == NonlocalityKind::NLW_c ||
                          kind == NonlocalityKind::NLR_c_lhv;

  ConicProgram p;
  const ScalarVar r = add_scalar(p);
  p.add_objective({r.block, r.index, 0, 1.0});
  const int qb = p.add_nonneg(static_cast<int>(NA * NB));
  std::vector<int> rows(beh.table().size());
  for (int x = 0; x < mA; ++x)
    for (int y = 0; y < mB; ++y)
      for (int a = 0; a < nA; ++a)
        for (int b = 0; b < nB; ++b) rows[beh.index(a, b, x, y)] = p.add_row(beh.p(a, b, x, y));
  for (std::int64_t mu = 0; mu < NA; ++mu)
    for (std::int64_t nu = 0; nu < NB; ++nu)
      for (int x = 0; x < mA; ++x)
        for (int y = 0; y < mB; ++y)
          p.add_term(rows[beh.index(sa[mu].assignment[x], sb[nu].assignment[y], x, y)], qb,
                     static_cast<int>(mu * NB + nu), 0, 1.0);

  std::optional<NpaBlock> nb;
  int pb = -1;
  std::vector<std::vector<int>> marg_rows(mP, std::vector<int>(nP, -1));
  if (npa) {
    const MomentMatrix t = build_npa_block(scenario_of(beh), opt.level);
    nb = add_npa_block(p, t, &r, 0.0);
    for (int x = 0; x < mA; ++x)
      for (int y = 0; y < mB; ++y)
        for (int a = 0; a < nA; ++a)
          for (int b = 0; b < nB; ++b)
            for (const Term& tm : nb->probability(a, b, x, y, weight ? 1.0 : -1.0))
              p.add_term(rows[beh.index(a, b, x, y)], tm);
    if (consistent) {
      for (int y = 0; y < mP; ++y) {
        for (int b = 0; b < nP; ++b) {
          LinExpr e = nb->marginal(opt.pinned, y, b);
          e.push_back({r.block, r.index, 0, -pinned_marg[y][b]});
          marg_rows[y][b] = p.add_equality(e, 0.0);
        }
      }
    }
  } else if (kind == NonlocalityKind::NLR_mar) {
    // noise: uniform on the free party times the pinned party's marginal
    const int nFree = alice_pinned ? nB : nA;
    for (int x = 0; x < mA; ++x)
      for (int y = 0; y < mB; ++y)
        for (int a = 0; a < nA; ++a)
          for (int b = 0; b < nB; ++b) {
            const double m = alice_pinned ? pinned_marg[x][a] : pinned_marg[y][b];
            p.add_term(rows[beh.index(a, b, x, y)], r.block, r.index, 0, -m / nFree);
          }
  } else if (lhv) {
    pb = p.add_nonneg(static_cast<int>(NA * NB));
    for (std::int64_t mu = 0; mu < NA; ++mu)
      for (std::int64_t nu = 0; nu < NB; ++nu)
        for (int x = 0; x < mA; ++x)
          for (int y = 0; y < mB; ++y)
            p.add_term(rows[beh.index(sa[mu].assignment[x], sb[nu].assignment[y], x, y)], pb,
                       static_cast<int>(mu * NB + nu), 0, -1.0);
    LinExpr e;
    for (std::int64_t k = 0; k < NA * NB; ++k) e.push_back({pb, static_cast<int>(k), 0, 1.0});
    e.push_back({r.block, r.index, 0, -1.0});
    p.add_equality(e, 0.0);
    if (consistent) {
      const auto& sp = alice_pinned ? sa : sb;
      for (int y = 0; y < mP; ++y) {
        for (int b = 0; b < nP; ++b) {
          LinExpr c;
          for (std::int64_t mu = 0; mu < NA; ++mu)
            for (std::int64_t nu = 0; nu < NB; ++nu) {
              const auto& st = sp[alice_pinned ? mu : nu];
              if (st.assignment[y] == b) c.push_back({pb, static_cast<int>(mu * NB + nu), 0, 1.0});
            }
          c.push_back({r.block, r.index, 0, -pinned_marg[y][b]});
          marg_rows[y][b] = p.add_equality(c, 0.0);
        }
      }
    }
  }

  const ConicSolution sol =
      detail::solve_or_throw(p, opt.tol, "nonlocality quantifier " + to_string(kind));

  NonlocalityResult res;
  res.kind = kind;
  res.value = std::max(0.0, scalar_value(sol, r));
  res.exact = !npa;
  res.level = npa ? opt.level : 0;
  res.gap = sol.gap;
  res.iterations = sol.iterations;
  res.local_scaled = RMatrix::Zero(NA, NB);
  for (std::int64_t mu = 0; mu < NA; ++mu)
    for (std::int64_t nu = 0; nu < NB; ++nu)
      res.local_scaled(mu, nu) = std::max(0.0, sol.primal[qb](mu * NB + nu, 0));

  res.noise_scaled.assign(beh.table().size(), 0.0);
  if (npa) {
    res.noise_scaled = npa_table(sol, *nb);
    res.noise_moment_matrix = npa_moment_matrix(sol, *nb);
  } else if (kind == NonlocalityKind::NLR_mar) {
    const int nFree = alice_pinned ? nB : nA;
    for (int x = 0; x < mA; ++x)
      for (int y = 0; y < mB; ++y)
        for (int a = 0; a < nA; ++a)
          for (int b = 0; b < nB; ++b)
            res.noise_scaled[beh.index(a, b, x, y)] =
                res.value * (alice_pinned ? pinned_marg[x][a] : pinned_marg[y][b]) / nFree;
  } else {
    for (std::int64_t mu = 0; mu < NA; ++mu)
      for (std::int64_t nu = 0; nu < NB; ++nu) {
        const double w = std::max(0.0, sol.primal[pb](mu * NB + nu, 0));
        for (int x = 0; x < mA; ++x)
          for (int y = 0; y < mB; ++y)
            res.noise_scaled[beh.index(sa[mu].assignment[x], sb[nu].assignment[y], x, y)] += w;
      }
  }

  BellCertificate& c = res.certificate;
  c.functional.scenario = scenario_of(beh);
  c.functional.coefficients.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) c.functional.coefficients[i] = sol.dual(rows[i]);
  c.bound = 0.0;
  c.value = c.functional.evaluate(beh);
  c.violation = c.value - c.bound;
  c.level_relaxed = npa;

  res.marginal_gradient.assign(mP, std::vector<double>(nP, 0.0));
  for (int y = 0; y < mP; ++y)
    for (int b = 0; b < nP; ++b)
      if (marg_rows[y][b] >= 0) res.marginal_gradient[y][b] = sol.dual(marg_rows[y][b]) * res.value;
  if (kind == NonlocalityKind::NLR_mar) {
    const int nFree = alice_pinned ? nB : nA;
    for (int x = 0; x < mA; ++x)
      for (int y = 0; y < mB; ++y)
        for (int a = 0; a < nA; ++a)
          for (int b = 0; b < nB; ++b) {
            const double g = sol.dual(rows[beh.index(a, b, x, y)]) * res.value / nFree;
            if (alice_pinned) res.marginal_gradient[x][a] += g;
            else res.marginal_gradient[y][b] += g;
          }
  }
  return res;
}

LocalMembership is_local(const Behaviour& b, double threshold, const Tolerances& tol,
                         std::int64_t cap) {
  NonlocalityOptions opt;
  opt.tol = tol;
  opt.strategy_cap = cap;
  const NonlocalityResult r = nonlocality_quantifier(b, NonlocalityKind::NLR_lhv, opt);
  LocalMembership out;
  out.robustness = r.value;
  out.local = r.value <= threshold;
  if (out.local) {
    out.model = r.local_model(b);
  } else {
    out.certificate = bell_certificate(r, b, cap);
  }
  return out;
}

BellCertificate bell_certificate(const NonlocalityResult& r, const Behaviour& b,
                                 std::int64_t cap) {
  BellCertificate c = r.certificate;
  c.enumerated_bound = c.functional.local_bound(cap);
  c.value = c.functional.evaluate(b);
  c.violation = c.value - c.bound;
  return c;
}

std::string format_inequality(const BellCertificate& c) {
  const BellScenario& s = c.functional.scenario;
  std::ostringstream os;
  os.precision(10);
  os << "sum_{abxy} B(ab|xy) P(ab|xy) <= " << c.bound << "\n";
  for (int x = 0; x < s.mA; ++x)
    for (int y = 0; y < s.mB; ++y)
      for (int a = 0; a < s.nA; ++a)
        for (int b = 0; b < s.nB; ++b)
          os << "B(" << a << b << "|" << x << y << ") = "
             << c.functional.coefficients[((x * s.mB + y) * s.nA + a) * s.nB + b] << "\n";
  os << "enumerated local maximum " << c.enumerated_bound << "\n";
  os << "value " << c.value << ", violation " << c.violation;
  if (c.level_relaxed) os << " (NPA-relaxed program)";
  os << "\n";
  return os.str();
}

// ---------------------------------------------------------------- NS projection

namespace {

// Q = M theta + q0 over the full table, theta in Collins-Gisin coordinates.
struct CgMap {
  Eigen::MatrixXd M;
  Eigen::VectorXd q0;
};

CgMap cg_map(int mA, int nA, int mB, int nB) {
  const int la = nA - 1, lb = nB - 1;
  const int ka = mA * la, kb = mB * lb;
  const int dim = ka + kb + mA * mB * la * lb;
  const int rows = mA * mB * nA * nB;
  CgMap m{Eigen::MatrixXd::Zero(rows, dim), Eigen::VectorXd::Zero(rows)};
  auto ia = [&](int x, int a) { return x * la + a; };
  auto ib = [&](int y, int b) { return ka + y * lb + b; };
  auto iab = [&](int x, int y, int a, int b) { return ka + kb + ((x * mB + y) * la + a) * lb + b; };
  for (int x = 0; x < mA; ++x)
    for (int y = 0; y < mB; ++y)
      for (int a = 0; a < nA; ++a)
        for (int b = 0; b < nB; ++b) {
          const int r = ((x * mB + y) * nA + a) * nB + b;
          auto row = m.M.row(r);
          if (a < la && b < lb) {
            row(iab(x, y, a, b)) = 1;
          } else if (a == la && b < lb) {
            row(ib(y, b)) = 1;
            for (int k = 0; k < la; ++k) row(iab(x, y, k, b)) -= 1;
          } else if (a < la && b == lb) {
            row(ia(x, a)) = 1;
            for (int k = 0; k < lb; ++k) row(iab(x, y, a, k)) -= 1;
          } else {
            m.q0(r) = 1;
            for (int k = 0; k < la; ++k) row(ia(x, k)) -= 1;
            for (int k = 0; k < lb; ++k) row(ib(y, k)) -= 1;
            for (int i = 0; i < la; ++i)
              for (int j = 0; j < lb; ++j) row(iab(x, y, i, j)) += 1;
          }
        }
  return m;
}

}  // namespace

NsProjection ns_project(const Behaviour& raw, const NsProjectOptions& opt) {
  const int mA = raw.inputs_a(), nA = raw.outcomes_a(), mB = raw.inputs_b(),
            nB = raw.outcomes_b();
  const int slice = nA * nB;
  const auto& t = raw.table();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= 0)) throw ValidationError("ns_project: negative or NaN entry in raw table");
  }
  for (int s = 0; s < mA * mB; ++s) {
    double sum = 0;
    for (int k = 0; k < slice; ++k) sum += t[s * slice + k];
    if (std::abs(sum - 1) > 1e-6) {
      throw ValidationError("ns_project: setting slice " + std::to_string(s) +
                            " sums to " + std::to_string(sum));
    }
  }
  std::vector<double> w = opt.weights;
  if (w.empty()) w.assign(mA * mB, 1.0 / (mA * mB));
  if (static_cast<int>(w.size()) != mA * mB) {
    throw DimensionError("ns_project: expected " + std::to_string(mA * mB) + " weights");
  }

  const CgMap cg = cg_map(mA, nA, mB, nB);
  const int rows = static_cast<int>(t.size());
  NsProjection out;
  Eigen::VectorXd target(rows);
  for (int i = 0; i < rows; ++i) {
    double v = t[i];
    if (v < opt.epsilon) {
      v = opt.epsilon;
      ++out.floored_entries;
    }
    target(i) = w[i / slice] * v;
  }

  auto objective = [&](const Eigen::VectorXd& q) {
    double f = 0;
    for (int i = 0; i < rows; ++i) {
      if (q(i) <= 0) return std::numeric_limits<double>::infinity();
      f -= target(i) * std::log(q(i));
    }
    return f;
  };

  // uniform start
  // the table itself is the iterate so tiny entries keep relative precision
  const Eigen::VectorXd theta0 =
      cg.M.colPivHouseholderQr().solve(Eigen::VectorXd::Constant(rows, 1.0 / slice) - cg.q0);
  Eigen::VectorXd q = cg.M * theta0 + cg.q0;
  double f = objective(q);
  Eigen::VectorXd grad;
  for (out.iterations = 0; out.iterations < opt.max_iter; ++out.iterations) {
    const Eigen::VectorXd ratio = target.cwiseQuotient(q);
    grad = -cg.M.transpose() * ratio;
    out.kkt_residual = grad.lpNorm<Eigen::Infinity>();
    if (out.kkt_residual <= opt.kkt_tol) {
      out.converged = true;
      break;
    }
    const Eigen::VectorXd curv = ratio.cwiseQuotient(q);
    const Eigen::MatrixXd H = cg.M.transpose() * curv.asDiagonal() * cg.M;
    const Eigen::VectorXd step = H.ldlt().solve(-grad);
    const Eigen::VectorXd dq = cg.M * step;
    double alpha = 1.0;
    for (int i = 0; i < rows; ++i)
      if (dq(i) < 0) alpha = std::min(alpha, -0.99 * q(i) / dq(i));
    const double slope = grad.dot(step);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd qn = q + alpha * dq;
      const double fn = objective(qn);
      if (fn <= f + 1e-4 * alpha * slope) {
        q = qn;
        f = fn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  if (!out.converged) {
    const Eigen::VectorXd ratio = target.cwiseQuotient(q);
    out.kkt_residual = (cg.M.transpose() * ratio).lpNorm<Eigen::Infinity>();
    out.converged = out.kkt_residual <= 1e-8;
  }

  std::vector<double> table(q.data(), q.data() + rows);
  out.divergence = 0;
  for (int i = 0; i < rows; ++i)
    if (t[i] > 0) out.divergence += w[i / slice] * t[i] * std::log(t[i] / table[i]);
  out.behaviour = Behaviour(mA, nA, mB, nB, std::move(table), false, 1e-10);
  return out;
}

}  // namespace quantrel
