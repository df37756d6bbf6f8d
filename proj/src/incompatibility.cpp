#include "quantrel/incompatibility.hpp"

#include "model_util.hpp"
#include "quantrel/errors.hpp"

#include <cmath>

namespace quantrel {

using detail::herm_op;

std::string to_string(IncompatKind k) {
  switch (k) {
    case IncompatKind::robustness: return "IR";
    case IncompatKind::random_robustness: return "IR_r";
    case IncompatKind::jm_robustness: return "IR_jm";
    case IncompatKind::weight: return "IW";
  }
  return "?";
}

IncompatKind parse_incompat_kind(const std::string& s) {
  if (s == "IR" || s == "robustness") return IncompatKind::robustness;
  if (s == "IR_r" || s == "IRr" || s == "random_robustness") return IncompatKind::random_robustness;
  if (s == "IR_jm" || s == "IRjm" || s == "jm_robustness") return IncompatKind::jm_robustness;
  if (s == "IW" || s == "weight") return IncompatKind::weight;
  throw ValidationError("unknown incompatibility kind '" + s + "' (IR, IR_r, IR_jm, IW)");
}

ParentPovm IncompatResult::parent(int inputs, int outcomes) const {
  ParentPovm g;
  g.inputs = inputs;
  g.outcomes = outcomes;
  const double norm = kind == IncompatKind::weight ? 1.0 - value : 1.0 + value;
  for (const auto& e : parent_scaled) g.effects.push_back(e * (1.0 / norm));
  return g;
}

IncompatResult incompatibility_quantifier(const MeasurementSet& meas, IncompatKind kind,
                                          const Tolerances& tol, std::int64_t cap) {
  const int m = meas.inputs(), n = meas.outcomes(), d = meas.dim();
  const auto strategies = enumerate_strategies(m, n, cap);
  const bool cx = !meas.is_real();
  const CMatrix id = CMatrix::Identity(d, d);

  ConicProgram p;
  const ScalarVar t = add_scalar(p);
  p.add_objective({t.block, t.index, 0, 1.0});
  std::vector<HermVar> g, h;
  for (std::size_t l = 0; l < strategies.size(); ++l) g.push_back(add_herm_var(p, d, cx));
  const auto rows = detail::add_grid_rows(p, meas.effects(), cx);
  detail::add_strategy_sum(p, rows, strategies, g, 1.0);

  std::vector<std::vector<HermVar>> noise;
  std::vector<HermRows> norm_rows;
  switch (kind) {
    case IncompatKind::robustness:
    case IncompatKind::weight: {
      // Robustness: sum D G - N = M, sum_a N_{a|x} = t I.
      // Weight:     sum D G + O = M, sum_l G_l + t I = I.
      const double sign = kind == IncompatKind::robustness ? -1.0 : 1.0;
      noise.resize(m);
      for (int x = 0; x < m; ++x) {
        for (int a = 0; a < n; ++a) {
          noise[x].push_back(add_herm_var(p, d, cx));
          add_herm_term(p, rows[x][a], noise[x][a], sign);
        }
      }
      if (kind == IncompatKind::robustness) {
        for (int x = 0; x < m; ++x) {
          const HermRows r = add_herm_rows(p, CMatrix::Zero(d, d), cx);
          for (int a = 0; a < n; ++a) add_herm_term(p, r, noise[x][a], 1.0);
          add_herm_scalar_term(p, r, t, -id);
        }
      } else {
        const HermRows r = add_herm_rows(p, id, cx);
        for (const auto& v : g) add_herm_term(p, r, v, 1.0);
        add_herm_scalar_term(p, r, t, id);
        norm_rows.push_back(r);
      }
      break;
    }
    case IncompatKind::random_robustness:
      for (int x = 0; x < m; ++x)
        for (int a = 0; a < n; ++a) add_herm_scalar_term(p, rows[x][a], t, -id / double(n));
      break;
    case IncompatKind::jm_robustness: {
      for (std::size_t l = 0; l < strategies.size(); ++l) h.push_back(add_herm_var(p, d, cx));
      detail::add_strategy_sum(p, rows, strategies, h, -1.0);
      const HermRows r = add_herm_rows(p, CMatrix::Zero(d, d), cx);
      for (const auto& v : h) add_herm_term(p, r, v, 1.0);
      add_herm_scalar_term(p, r, t, -id);
      break;
    }
  }

  const ConicSolution s =
      detail::solve_or_throw(p, tol, "incompatibility quantifier " + to_string(kind));

  IncompatResult res;
  res.kind = kind;
  res.value = std::max(0.0, scalar_value(s, t));
  res.gap = s.gap;
  res.iterations = s.iterations;
  for (const auto& v : g) res.parent_scaled.push_back(herm_op(herm_value(s, v)));
  for (const auto& v : h) res.noise_parent_scaled.push_back(herm_op(herm_value(s, v)));
  res.noise_scaled.resize(m);
  for (int x = 0; x < m; ++x) {
    for (int a = 0; a < n; ++a) {
      if (!noise.empty()) {
        res.noise_scaled[x].push_back(herm_op(herm_value(s, noise[x][a])));
      } else if (kind == IncompatKind::random_robustness) {
        res.noise_scaled[x].push_back(herm_op(id * (res.value / n)));
      } else {
        CMatrix sum = CMatrix::Zero(d, d);
        for (std::size_t l = 0; l < strategies.size(); ++l) {
          if (strategies[l].assignment[x] == a) sum += res.noise_parent_scaled[l].matrix();
        }
        res.noise_scaled[x].push_back(herm_op(sum));
      }
    }
  }

  IncompatCertificate& c = res.certificate;
  c.coefficients = detail::grid_duals(s, rows);
  // The dual of sum G + tI = I enters as -Y.
  c.y = norm_rows.empty() ? HermitianOperator::zero(d) : herm_op(-herm_dual(s, norm_rows[0]));
  c.bound = c.y.trace();
  c.value = certificate_value(c, meas);
  c.violation = c.value - c.bound;
  return res;
}

double certificate_value(const IncompatCertificate& c, const MeasurementSet& m) {
  double v = 0.0;
  for (int x = 0; x < m.inputs(); ++x)
    for (int a = 0; a < m.outcomes(); ++a)
      v += (c.coefficients[x][a].matrix() * m.effect(x, a).matrix()).trace().real();
  return v;
}

double certificate_margin(const IncompatCertificate& c, int outcomes, std::int64_t cap) {
  return detail::max_strategy_eigenvalue(c.coefficients, outcomes, c.y.matrix(), cap);
}

JointMeasurability is_jointly_measurable(const MeasurementSet& m, double threshold,
                                         const Tolerances& tol, std::int64_t cap) {
  const IncompatResult r = incompatibility_quantifier(m, IncompatKind::robustness, tol, cap);
  JointMeasurability out;
  out.robustness = r.value;
  out.jointly_measurable = r.value <= threshold;
  if (out.jointly_measurable) {
    out.parent = r.parent(m.inputs(), m.outcomes());
  } else {
    out.certificate = r.certificate;
  }
  return out;
}

}  // namespace quantrel
