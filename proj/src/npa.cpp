#include "quantrel/npa.hpp"

#include "model_util.hpp"
#include "quantrel/errors.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <sstream>

namespace quantrel {

namespace {

// Applies idempotence and orthogonality of same-input projectors; nullopt for zero.
std::optional<std::vector<Symbol>> reduce(const std::vector<Symbol>& seq) {
  std::vector<Symbol> out;
  for (const Symbol& s : seq) {
    if (!out.empty() && out.back().input == s.input) {
      if (out.back().outcome != s.outcome) return std::nullopt;
      continue;
    }
    out.push_back(s);
  }
  return out;
}

OperatorWord adjoint(const OperatorWord& w) {
  OperatorWord r{w.alice, w.bob};
  std::reverse(r.alice.begin(), r.alice.end());
  std::reverse(r.bob.begin(), r.bob.end());
  return r;
}

std::optional<OperatorWord> canonical(const std::vector<Symbol>& alice,
                                      const std::vector<Symbol>& bob) {
  auto a = reduce(alice);
  auto b = reduce(bob);
  if (!a || !b) return std::nullopt;
  OperatorWord w{*a, *b};
  return std::min(w, adjoint(w));
}

void sequences(int inputs, int outcomes, int len, std::vector<Symbol>& cur,
               std::vector<std::vector<Symbol>>& out) {
  if (static_cast<int>(cur.size()) == len) {
    out.push_back(cur);
    return;
  }
  for (int x = 0; x < inputs; ++x) {
    if (!cur.empty() && cur.back().input == x) continue;
    for (int a = 0; a < outcomes; ++a) {
      cur.push_back({x, a});
      sequences(inputs, outcomes, len, cur, out);
      cur.pop_back();
    }
  }
}

double term_value(const ConicSolution& s, const Term& t) {
  return s.primal.at(t.block)(t.row, t.col) * t.coef;
}

double expr_value(const ConicSolution& s, const LinExpr& e) {
  double v = 0;
  for (const Term& t : e) v += term_value(s, t);
  return v;
}

void append(LinExpr& dst, const LinExpr& src) { dst.insert(dst.end(), src.begin(), src.end()); }

}  // namespace

BellScenario scenario_of(const Behaviour& b) {
  return {b.inputs_a(), b.outcomes_a(), b.inputs_b(), b.outcomes_b()};
}

std::string OperatorWord::str() const {
  if (alice.empty() && bob.empty()) return "1";
  std::ostringstream os;
  for (const auto& s : alice) os << "A" << s.outcome << "|" << s.input;
  for (const auto& s : bob) os << "B" << s.outcome << "|" << s.input;
  return os.str();
}

int MomentMatrix::class_of(const OperatorWord& w) const {
  const auto c = canonical(w.alice, w.bob);
  if (!c) return -1;
  const auto it = classes.find(*c);
  if (it == classes.end()) throw ValidationError("word " + w.str() + " not in moment matrix");
  return it->second;
}

MomentMatrix build_npa_block(const BellScenario& s, int level) {
  if (level != 1 && level != 2) {
    throw ValidationError("NPA level " + std::to_string(level) + " unsupported (use 1 or 2)");
  }
  MomentMatrix mm;
  mm.scenario = s;
  mm.level = level;
  for (int total = 0; total <= level; ++total) {
    for (int la = total; la >= 0; --la) {
      const int lb = total - la;
      std::vector<std::vector<Symbol>> as, bs;
      std::vector<Symbol> cur;
      sequences(s.mA, s.nA - 1, la, cur, as);
      sequences(s.mB, s.nB - 1, lb, cur, bs);
      for (const auto& a : as)
        for (const auto& b : bs) mm.index.push_back({a, b});
    }
  }
  const int n = mm.size();
  mm.entry_class.assign(static_cast<std::size_t>(n) * n, -1);
  for (int i = 0; i < n; ++i) {
    const OperatorWord wi = adjoint(mm.index[i]);
    for (int j = 0; j < n; ++j) {
      std::vector<Symbol> a = wi.alice, b = wi.bob;
      a.insert(a.end(), mm.index[j].alice.begin(), mm.index[j].alice.end());
      b.insert(b.end(), mm.index[j].bob.begin(), mm.index[j].bob.end());
      const auto w = canonical(a, b);
      if (!w) continue;
      auto [it, inserted] = mm.classes.try_emplace(*w, mm.num_classes);
      if (inserted) {
        ++mm.num_classes;
        mm.representative.emplace_back(std::min(i, j), std::max(i, j));
      }
      mm.entry_class[static_cast<std::size_t>(i) * n + j] = it->second;
    }
  }
  return mm;
}

LinExpr NpaBlock::word(const OperatorWord& w, double coef) const {
  const int c = tmpl.class_of(w);
  if (c < 0) return {};
  const auto [i, j] = tmpl.representative[c];
  return {{block, i, j, coef}};
}

LinExpr NpaBlock::normalization(double coef) const { return {{block, 0, 0, coef}}; }

LinExpr NpaBlock::marginal(Party party, int input, int outcome, double coef) const {
  const bool alice = party == Party::alice;
  const int last = (alice ? tmpl.scenario.nA : tmpl.scenario.nB) - 1;
  auto one = [&](int o) {
    OperatorWord w;
    (alice ? w.alice : w.bob).push_back({input, o});
    return w;
  };
  if (outcome < last) return word(one(outcome), coef);
  LinExpr e = normalization(coef);
  for (int o = 0; o < last; ++o) append(e, word(one(o), -coef));
  return e;
}

LinExpr NpaBlock::probability(int a, int b, int x, int y, double coef) const {
  const int la = tmpl.scenario.nA - 1, lb = tmpl.scenario.nB - 1;
  auto ab = [&](int aa, int bb, double c) {
    return word(OperatorWord{{{x, aa}}, {{y, bb}}}, c);
  };
  LinExpr e;
  if (a < la && b < lb) return ab(a, b, coef);
  if (a == la && b < lb) {
    e = marginal(Party::bob, y, b, coef);
    for (int k = 0; k < la; ++k) append(e, ab(k, b, -coef));
    return e;
  }
  if (a < la && b == lb) {
    e = marginal(Party::alice, x, a, coef);
    for (int k = 0; k < lb; ++k) append(e, ab(a, k, -coef));
    return e;
  }
  e = normalization(coef);
  for (int k = 0; k < la; ++k) append(e, marginal(Party::alice, x, k, -coef));
  for (int k = 0; k < lb; ++k) append(e, marginal(Party::bob, y, k, -coef));
  for (int i = 0; i < la; ++i)
    for (int j = 0; j < lb; ++j) append(e, ab(i, j, coef));
  return e;
}

NpaBlock add_npa_block(ConicProgram& p, const MomentMatrix& t, const ScalarVar* norm,
                       double norm_constant) {
  NpaBlock nb;
  nb.tmpl = t;
  const int n = t.size();
  nb.block = p.add_psd(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const int c = t.cls(i, j);
      if (c < 0) {
        p.add_equality({{nb.block, i, j, 1.0}}, 0.0);
        continue;
      }
      const auto rep = t.representative[c];
      if (rep.first == i && rep.second == j) continue;
      p.add_equality({{nb.block, i, j, 1.0}, {nb.block, rep.first, rep.second, -1.0}}, 0.0);
    }
  }
  LinExpr e{{nb.block, 0, 0, 1.0}};
  if (norm) e.push_back({norm->block, norm->index, 0, -1.0});
  p.add_equality(e, norm_constant);
  return nb;
}

RMatrix npa_moment_matrix(const ConicSolution& s, const NpaBlock& b) {
  const RMatrix& raw = s.primal.at(b.block);
  const int n = b.tmpl.size();
  std::vector<double> sum(b.tmpl.num_classes, 0.0);
  std::vector<int> cnt(b.tmpl.num_classes, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int c = b.tmpl.cls(i, j);
      if (c < 0) continue;
      sum[c] += raw(i, j);
      ++cnt[c];
    }
  }
  RMatrix g = RMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int c = b.tmpl.cls(i, j);
      if (c >= 0) g(i, j) = sum[c] / cnt[c];
    }
  }
  return g;
}

std::vector<double> npa_table(const ConicSolution& s, const NpaBlock& b) {
  const BellScenario& sc = b.tmpl.scenario;
  std::vector<double> t(static_cast<std::size_t>(sc.mA) * sc.nA * sc.mB * sc.nB);
  for (int x = 0; x < sc.mA; ++x)
    for (int y = 0; y < sc.mB; ++y)
      for (int a = 0; a < sc.nA; ++a)
        for (int bb = 0; bb < sc.nB; ++bb)
          t[((x * sc.mB + y) * sc.nA + a) * sc.nB + bb] =
              expr_value(s, b.probability(a, bb, x, y));
  return t;
}

// ---------------------------------------------------------------- functionals

double BellFunctional::evaluate(const std::vector<double>& table) const {
  double v = constant;
  for (std::size_t i = 0; i < coefficients.size(); ++i) v += coefficients[i] * table.at(i);
  return v;
}

double BellFunctional::evaluate(const Behaviour& b) const { return evaluate(b.table()); }

double BellFunctional::local_bound(std::int64_t cap) const {
  const BellScenario& s = scenario;
  const std::int64_t pairs = strategy_count(s.mA, s.nA, cap) * strategy_count(s.mB, s.nB, cap);
  if (pairs > cap) throw ResourceError("local strategy pairs exceed cap");
  const auto sa = enumerate_strategies(s.mA, s.nA, cap);
  const auto sb = enumerate_strategies(s.mB, s.nB, cap);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& mu : sa) {
    for (const auto& nu : sb) {
      double v = constant;
      for (int x = 0; x < s.mA; ++x)
        for (int y = 0; y < s.mB; ++y)
          v += coefficients[((x * s.mB + y) * s.nA + mu.assignment[x]) * s.nB + nu.assignment[y]];
      best = std::max(best, v);
    }
  }
  return best;
}

BellFunctional chsh_functional() {
  BellFunctional f;
  f.scenario = {2, 2, 2, 2};
  f.coefficients.assign(16, 0.0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          f.coefficients[((x * 2 + y) * 2 + a) * 2 + b] = (a ^ b ^ (x & y)) ? -1.0 : 1.0;
  return f;
}

NpaOptimum npa_optimize(const BellFunctional& f, int level, const Tolerances& tol) {
  const BellScenario& s = f.scenario;
  const MomentMatrix t = build_npa_block(s, level);
  ConicProgram p;
  const NpaBlock nb = add_npa_block(p, t);
  for (int x = 0; x < s.mA; ++x)
    for (int y = 0; y < s.mB; ++y)
      for (int a = 0; a < s.nA; ++a)
        for (int b = 0; b < s.nB; ++b) {
          const double c = f.coefficients.at(((x * s.mB + y) * s.nA + a) * s.nB + b);
          if (c != 0.0) p.add_objective(nb.probability(a, b, x, y, -c));
        }
  const ConicSolution sol = detail::solve_or_throw(p, tol, "NPA optimisation");
  NpaOptimum out;
  out.value = -sol.primal_objective + f.constant;
  out.moment_matrix = npa_moment_matrix(sol, nb);
  out.table = npa_table(sol, nb);
  return out;
}

NpaMembership npa_membership(const Behaviour& beh, int level, double threshold,
                             const Tolerances& tol) {
  if (beh.signalling()) throw SignallingError("NPA membership needs a no-signalling behaviour");
  const BellScenario s = scenario_of(beh);
  const MomentMatrix t = build_npa_block(s, level);
  const auto pa = behaviour_marginal(beh, Party::alice, false, 1e-7);
  const auto pb = behaviour_marginal(beh, Party::bob, false, 1e-7);
  ConicProgram p;
  const ScalarVar r = add_scalar(p);
  p.add_objective({r.block, r.index, 0, 1.0});
  const NpaBlock nb = add_npa_block(p, t, &r, 1.0);
  const int norm_row = p.num_rows() - 1;
  // Collins-Gisin rows: Gamma entry - r * uniform = P entry.
  struct CgRow {
    int row, kind, x, y, a, b;  // kind 0: A marginal, 1: B marginal, 2: joint
  };
  std::vector<CgRow> cg;
  for (int x = 0; x < s.mA; ++x) {
    for (int a = 0; a + 1 < s.nA; ++a) {
      LinExpr e = nb.word(OperatorWord{{{x, a}}, {}});
      e.push_back({r.block, r.index, 0, -1.0 / s.nA});
      cg.push_back({p.add_equality(e, pa[x][a]), 0, x, 0, a, 0});
    }
  }
  for (int y = 0; y < s.mB; ++y) {
    for (int b = 0; b + 1 < s.nB; ++b) {
      LinExpr e = nb.word(OperatorWord{{}, {{y, b}}});
      e.push_back({r.block, r.index, 0, -1.0 / s.nB});
      cg.push_back({p.add_equality(e, pb[y][b]), 1, 0, y, 0, b});
    }
  }
  for (int x = 0; x < s.mA; ++x)
    for (int y = 0; y < s.mB; ++y)
      for (int a = 0; a + 1 < s.nA; ++a)
        for (int b = 0; b + 1 < s.nB; ++b) {
          LinExpr e = nb.word(OperatorWord{{{x, a}}, {{y, b}}});
          e.push_back({r.block, r.index, 0, -1.0 / (s.nA * s.nB)});
          cg.push_back({p.add_equality(e, beh.p(a, b, x, y)), 2, x, y, a, b});
        }
  const ConicSolution sol = detail::solve_or_throw(p, tol, "NPA membership");

  NpaMembership out;
  out.robustness = std::max(0.0, scalar_value(sol, r));
  out.feasible = out.robustness <= threshold;
  out.moment_matrix = npa_moment_matrix(sol, nb);
  BellFunctional& f = out.functional;
  f.scenario = s;
  f.coefficients.assign(beh.table().size(), 0.0);
  for (const CgRow& c : cg) {
    const double y = sol.dual(c.row);
    if (c.kind == 0) {
      for (int b = 0; b < s.nB; ++b) f.coefficients[beh.index(c.a, b, c.x, 0)] += y;
    } else if (c.kind == 1) {
      for (int a = 0; a < s.nA; ++a) f.coefficients[beh.index(a, c.b, 0, c.y)] += y;
    } else {
      f.coefficients[beh.index(c.a, c.b, c.x, c.y)] += y;
    }
  }
  out.bound = -sol.dual(norm_row);
  out.violation = f.evaluate(beh) - out.bound;
  return out;
}

}  // namespace quantrel
