#include "quantrel/steering.hpp"

#include "model_util.hpp"
#include "quantrel/errors.hpp"

#include <cmath>
#include <sstream>

namespace quantrel {

using detail::herm_op;

std::string to_string(SteeringKind k) {
  switch (k) {
    case SteeringKind::SR: return "SR";
    case SteeringKind::SR_red: return "SR_red";
    case SteeringKind::SR_lhs: return "SR_lhs";
    case SteeringKind::SW: return "SW";
    case SteeringKind::SR_c: return "SR_c";
    case SteeringKind::SR_c_lhs: return "SR_c_lhs";
    case SteeringKind::SW_c: return "SW_c";
  }
  return "?";
}

SteeringKind parse_steering_kind(const std::string& s) {
  for (auto k : {SteeringKind::SR, SteeringKind::SR_red, SteeringKind::SR_lhs, SteeringKind::SW,
                 SteeringKind::SR_c, SteeringKind::SR_c_lhs, SteeringKind::SW_c}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown steering kind '" + s +
                        "' (SR, SR_red, SR_lhs, SW, SR_c, SR_c_lhs, SW_c)");
}

LhsModel SteeringResult::model(int inputs, int outcomes) const {
  LhsModel m;
  m.inputs = inputs;
  m.outcomes = outcomes;
  const bool weight = kind == SteeringKind::SW || kind == SteeringKind::SW_c;
  const double norm = weight ? 1.0 - value : 1.0 + value;
  for (const auto& s : model_scaled) m.states.push_back(s * (1.0 / norm));
  return m;
}

SteeringResult steering_quantifier(const Assemblage& as, SteeringKind kind,
                                   const Tolerances& tol, std::int64_t cap) {
  const int m = as.inputs(), n = as.outcomes(), d = as.dim();
  const auto strategies = enumerate_strategies(m, n, cap);
  const bool cx = !as.is_real();
  const CMatrix rho = reduced_state(as, 1e-7).matrix();
  const bool weight = kind == SteeringKind::SW || kind == SteeringKind::SW_c;
  const bool lhs_noise = kind == SteeringKind::SR_lhs || kind == SteeringKind::SR_c_lhs;
  const bool free_noise = kind == SteeringKind::SR || kind == SteeringKind::SR_c || weight;
  const bool consistent = kind == SteeringKind::SR_c || kind == SteeringKind::SW_c;

  ConicProgram p;
  const ScalarVar s = add_scalar(p);
  p.add_objective({s.block, s.index, 0, 1.0});
  std::vector<HermVar> sig, gam;
  for (std::size_t l = 0; l < strategies.size(); ++l) sig.push_back(add_herm_var(p, d, cx));
  const auto rows = detail::add_grid_rows(p, as.members(), cx);
  detail::add_strategy_sum(p, rows, strategies, sig, 1.0);

  int norm_row = -1;
  std::vector<std::vector<HermVar>> pi;
  if (free_noise) {
    pi.resize(m);
    for (int x = 0; x < m; ++x) {
      for (int a = 0; a < n; ++a) {
        pi[x].push_back(add_herm_var(p, d, cx));
        add_herm_term(p, rows[x][a], pi[x][a], weight ? 1.0 : -1.0);
      }
    }
    // sum tr sigma~ -/+ s = 1
    LinExpr e = detail::sum_traces(sig);
    e.push_back({s.block, s.index, 0, weight ? 1.0 : -1.0});
    norm_row = p.add_equality(e, 1.0);
    if (consistent) {
      for (int x = 0; x < m; ++x) {
        const HermRows r = add_herm_rows(p, CMatrix::Zero(d, d), cx);
        for (int a = 0; a < n; ++a) add_herm_term(p, r, pi[x][a], 1.0);
        add_herm_scalar_term(p, r, s, -rho);
      }
    }
  } else if (kind == SteeringKind::SR_red) {
    for (int x = 0; x < m; ++x)
      for (int a = 0; a < n; ++a) add_herm_scalar_term(p, rows[x][a], s, -rho / double(n));
  } else if (lhs_noise) {
    for (std::size_t l = 0; l < strategies.size(); ++l) gam.push_back(add_herm_var(p, d, cx));
    detail::add_strategy_sum(p, rows, strategies, gam, -1.0);
    LinExpr e = detail::sum_traces(sig);
    e.push_back({s.block, s.index, 0, -1.0});
    norm_row = p.add_equality(e, 1.0);
    LinExpr g = detail::sum_traces(gam);
    g.push_back({s.block, s.index, 0, -1.0});
    p.add_equality(g, 0.0);
    if (kind == SteeringKind::SR_c_lhs) {
      const HermRows r = add_herm_rows(p, CMatrix::Zero(d, d), cx);
      for (const auto& v : gam) add_herm_term(p, r, v, 1.0);
      add_herm_scalar_term(p, r, s, -rho);
    }
  }

  const ConicSolution sol =
      detail::solve_or_throw(p, tol, "steering quantifier " + to_string(kind));

  SteeringResult res;
  res.kind = kind;
  res.value = std::max(0.0, scalar_value(sol, s));
  res.gap = sol.gap;
  res.iterations = sol.iterations;
  for (const auto& v : sig) res.model_scaled.push_back(herm_op(herm_value(sol, v)));
  for (const auto& v : gam) res.noise_model_scaled.push_back(herm_op(herm_value(sol, v)));
  res.noise_scaled.resize(m);
  for (int x = 0; x < m; ++x) {
    for (int a = 0; a < n; ++a) {
      CMatrix v = CMatrix::Zero(d, d);
      if (!pi.empty()) {
        v = herm_value(sol, pi[x][a]);
      } else if (kind == SteeringKind::SR_red) {
        v = rho * (res.value / n);
      } else {
        for (std::size_t l = 0; l < strategies.size(); ++l) {
          if (strategies[l].assignment[x] == a) v += res.noise_model_scaled[l].matrix();
        }
      }
      res.noise_scaled[x].push_back(herm_op(v));
    }
  }

  SteeringCertificate& c = res.certificate;
  c.coefficients = detail::grid_duals(sol, rows);
  c.bound = norm_row >= 0 ? -sol.dual(norm_row) : 0.0;
  c.value = certificate_value(c, as);
  c.violation = c.value - c.bound;
  return res;
}

double certificate_value(const SteeringCertificate& c, const Assemblage& a) {
  double v = 0.0;
  for (int x = 0; x < a.inputs(); ++x)
    for (int k = 0; k < a.outcomes(); ++k)
      v += (c.coefficients[x][k].matrix() * a.member(x, k).matrix()).trace().real();
  return v;
}

double lhs_bound(const SteeringCertificate& c, int outcomes, std::int64_t cap) {
  const int d = c.coefficients.at(0).at(0).dim();
  return detail::max_strategy_eigenvalue(c.coefficients, outcomes, CMatrix::Zero(d, d), cap);
}

SteeringCertificate steering_certificate(const SteeringResult& r, const Assemblage& a,
                                         std::int64_t cap) {
  SteeringCertificate c = r.certificate;
  c.enumerated_bound = lhs_bound(c, a.outcomes(), cap);
  c.value = certificate_value(c, a);
  c.violation = c.value - c.bound;
  return c;
}

LhsMembership has_lhs_model(const Assemblage& a, double threshold, const Tolerances& tol,
                            std::int64_t cap) {
  const SteeringResult r = steering_quantifier(a, SteeringKind::SR, tol, cap);
  LhsMembership out;
  out.robustness = r.value;
  out.has_model = r.value <= threshold;
  if (out.has_model) {
    out.model = r.model(a.inputs(), a.outcomes());
  } else {
    out.certificate = steering_certificate(r, a, cap);
  }
  return out;
}

std::string format_inequality(const SteeringCertificate& c) {
  std::ostringstream os;
  os.precision(10);
  os << "sum_{a,x} tr[F_{a|x} sigma_{a|x}] <= " << c.bound << "\n";
  for (std::size_t x = 0; x < c.coefficients.size(); ++x) {
    for (std::size_t a = 0; a < c.coefficients[x].size(); ++a) {
      os << "F_{" << a << "|" << x << "} =\n" << c.coefficients[x][a].matrix() << "\n";
    }
  }
  os << "enumerated LHS maximum " << c.enumerated_bound << "\n";
  os << "value " << c.value << ", violation " << c.violation << "\n";
  return os.str();
}

}  // namespace quantrel
