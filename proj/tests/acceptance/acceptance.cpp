#include "quantrel/errors.hpp"
#include "quantrel/experiments.hpp"
#include "quantrel/incompatibility.hpp"
#include "quantrel/io.hpp"
#include "quantrel/nonlocality.hpp"
#include "quantrel/npa.hpp"
#include "quantrel/steering.hpp"

#include <CLI11.hpp>
#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace quantrel;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << (detail.tellp() > 0 ? "; " : "") << what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Worst deviation tracker for tolerance checks.
struct Worst {
  double value = 0.0;
  std::string where;
  void update(double v, const std::string& w) {
    if (v > value) value = v, where = w;
  }
};

std::array<double, 3> random_direction(std::mt19937& rng) {
  std::normal_distribution<double> g;
  double v[3] = {g(rng), g(rng), g(rng)};
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

// Two-outcome qubit POVM ((1 + c) I + eta n.sigma) / 2 with |c| + eta <= 1.
MeasurementSet random_qubit_povms(int m, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  const CMatrix id = CMatrix::Identity(2, 2);
  std::vector<std::vector<HermitianOperator>> eff;
  for (int x = 0; x < m; ++x) {
    const auto n = random_direction(rng);
    const double eta = 0.5 + 0.5 * u(rng);
    const double c = (1 - eta) * (2 * u(rng) - 1);
    const CMatrix ns = n[0] * pauli_x().matrix() + n[1] * pauli_y().matrix() + n[2] * pauli_z().matrix();
    const CMatrix e0 = ((1 + c) * id + eta * ns) / 2.0;
    eff.push_back({HermitianOperator(e0), HermitianOperator(CMatrix(id - e0))});
  }
  return MeasurementSet(std::move(eff));
}

HermitianOperator random_density(int d, std::mt19937& rng) {
  std::normal_distribution<double> g;
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  CMatrix r = m * m.adjoint();
  r /= r.trace().real();
  return HermitianOperator(r);
}

// ---------------------------------------------------------------- criteria

Outcome criterion1() {
  Outcome o;
  struct Case {
    const char* axes;
    double expect;
  } cases[] = {{"XZ", std::sqrt(2.0) - 1}, {"XYZ", std::sqrt(3.0) - 1}};
  for (const auto& c : cases) {
    const auto t0 = Clock::now();
    const double v =
        incompatibility_quantifier(pauli_measurements(c.axes), IncompatKind::random_robustness).value;
    const double secs = seconds_since(t0);
    o.detail << (o.detail.tellp() > 0 ? ", " : "") << "IR_r(" << c.axes << ") = " << v << " in "
             << fmt(secs) << " s";
    o.require(std::abs(v - c.expect) <= 1e-6, std::string(c.axes) + " off by " + fmt(v - c.expect));
    o.require(secs < 5.0, std::string(c.axes) + " took too long");
  }
  return o;
}

Outcome table1_row(const std::string& experiment, bool extended, double budget) {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / ("quantrel_acceptance_" + experiment);
  ReproduceOptions opt;
  opt.outdir = dir.string();
  opt.extended = extended;
  opt.budget_seconds = budget;
  const auto t0 = Clock::now();
  const ReproduceReport rep = reproduce("table1", opt);
  const double secs = seconds_since(t0);
  int seen = 0;
  double worst = 0;
  std::ostringstream devs;
  for (const auto& r : rep.rows) {
    if (r.experiment != experiment) continue;
    ++seen;
    worst = std::max(worst, r.deviation);
    devs << " " << r.quantity << "=" << fmt(r.computed) << "(dev " << fmt(r.deviation) << ")";
  }
  o.detail << experiment << " row in " << fmt(secs) << " s, status " << rep.status << ":"
           << devs.str();
  o.require(seen == 6, "only " + std::to_string(seen) + " of 6 values computed");
  o.require(worst <= 1e-5, "max deviation " + fmt(worst) + " exceeds 1e-5");
  o.require(secs < budget, "runtime exceeds " + fmt(budget) + " s");
  std::filesystem::remove_all(dir);
  return o;
}

Outcome criterion4() {
  Outcome o;
  struct Family {
    std::string alice, bob;
    std::vector<std::string> q;
    double threshold;
  } fams[] = {{"paulis:XYZ", "", {"SR", "SR_c", "SR_red", "SW_c"}, 1 / std::sqrt(3.0)},
              {"paulis:XZ", "chsh_bob", {"NLR_c", "NLR_mar", "NLW_c"}, 1 / std::sqrt(2.0)}};
  for (const auto& f : fams) {
    SweepSpec s;
    s.family = "werner";
    for (int i = 0; i <= 20; ++i) s.grid.push_back(i / 20.0);
    s.alice = f.alice;
    s.bob = f.bob;
    s.quantifiers = f.q;
    const SweepResult r = sweep(s);
    for (const auto& sum : r.summaries) {
      const double th = sum.refined_threshold.value_or(-1);
      o.detail << (o.detail.tellp() > 0 ? ", " : "") << sum.quantifier << " v*=" << th
               << " lin.dev " << fmt(sum.max_linear_deviation);
      o.require(std::abs(th - f.threshold) <= 1e-3, sum.quantifier + " threshold off");
      o.require(sum.max_linear_deviation < 1e-4, sum.quantifier + " not linear");
    }
  }
  return o;
}

struct DualityLog {
  Worst gap, cert;
  int solves = 0;
  void result(double g, const std::string& w) {
    ++solves;
    gap.update(g, w);
  }
};

Outcome criterion5(DualityLog& dual) {
  Outcome o;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> th(0.1, M_PI / 4);
  Worst w;
  for (int k = 0; k < 25; ++k) {
    const double theta = th(rng);
    const auto m = random_qubit_povms(2 + k % 2, rng);
    const auto a = steer(make_state(StateSpec::pure_theta(theta)), m);
    const std::pair<IncompatKind, SteeringKind> pairs[] = {
        {IncompatKind::robustness, SteeringKind::SR_c},
        {IncompatKind::random_robustness, SteeringKind::SR_red},
        {IncompatKind::jm_robustness, SteeringKind::SR_c_lhs},
        {IncompatKind::weight, SteeringKind::SW_c}};
    for (const auto& [ik, sk] : pairs) {
      const auto ir = incompatibility_quantifier(m, ik);
      const auto sr = steering_quantifier(a, sk);
      dual.result(ir.gap, to_string(ik));
      dual.result(sr.gap, to_string(sk));
      w.update(std::abs(ir.value - sr.value),
               "case " + std::to_string(k) + " " + to_string(ik) + "/" + to_string(sk));
    }
  }
  o.detail << "25 pure states, worst |I - S| = " << fmt(w.value) << " (" << w.where << ")";
  o.require(w.value <= 1e-6, "tightness violated");
  return o;
}

Outcome criterion6(DualityLog& dual) {
  Outcome o;
  std::mt19937 rng(77);
  Worst w;
  int checks = 0;
  NonlocalityOptions nlo;
  for (int k = 0; k < 50; ++k) {
    const BipartiteState st(2, 2, random_density(4, rng));
    const auto m = random_qubit_povms(2 + k % 2, rng);
    const auto bob = random_qubit_povms(2, rng);
    const auto a = steer(st, m);
    const auto b = measure(a, bob);

    std::map<std::string, double> v;
    for (auto ik : {IncompatKind::robustness, IncompatKind::random_robustness,
                    IncompatKind::jm_robustness, IncompatKind::weight}) {
      const auto r = incompatibility_quantifier(m, ik);
      dual.result(r.gap, to_string(ik));
      v[to_string(ik)] = r.value;
    }
    for (auto sk : {SteeringKind::SR, SteeringKind::SR_red, SteeringKind::SR_lhs, SteeringKind::SW,
                    SteeringKind::SR_c, SteeringKind::SR_c_lhs, SteeringKind::SW_c}) {
      const auto r = steering_quantifier(a, sk);
      dual.result(r.gap, to_string(sk));
      v[to_string(sk)] = r.value;
    }
    for (auto nk : {NonlocalityKind::NLR, NonlocalityKind::NLR_mar, NonlocalityKind::NLR_lhv,
                    NonlocalityKind::NLW, NonlocalityKind::NLR_c, NonlocalityKind::NLR_c_lhv,
                    NonlocalityKind::NLW_c}) {
      const auto r = nonlocality_quantifier(b, nk, nlo);
      dual.result(r.gap, to_string(nk));
      v[to_string(nk)] = r.value;
    }
    const std::pair<const char*, const char*> ge[] = {
        // rows of the chain and their transitive closures
        {"IR", "SR"},        {"SR", "NLR"},         {"IR", "NLR"},
        {"IR_r", "SR_red"},  {"SR_red", "NLR_mar"}, {"IR_r", "NLR_mar"},
        {"IR_jm", "SR_lhs"}, {"SR_lhs", "NLR_lhv"}, {"IR_jm", "NLR_lhv"},
        {"IW", "SW"},        {"SW", "NLW"},         {"IW", "NLW"},
        // consistent variants
        {"IR", "SR_c"},      {"SR_c", "SR"},        {"SR_c", "NLR_c"},     {"NLR_c", "NLR"},
        {"IR_jm", "SR_c_lhs"}, {"SR_c_lhs", "SR_lhs"}, {"SR_c_lhs", "NLR_c_lhv"},
        {"NLR_c_lhv", "NLR_lhv"}, {"IW", "SW_c"},   {"SW_c", "SW"},        {"SW_c", "NLW_c"},
        {"NLW_c", "NLW"}};
    for (const auto& [hi, lo] : ge) {
      ++checks;
      w.update(v[lo] - v[hi], "case " + std::to_string(k) + " " + hi + " >= " + lo);
    }
  }
  o.detail << checks << " relations on 50 triples, worst violation " << fmt(w.value);
  if (w.value > 0) o.detail << " (" << w.where << ")";
  o.require(w.value <= 1e-7, "chain violated");
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto b = isotropic_chsh(1.0);
  const double mar = nonlocality_quantifier(b, NonlocalityKind::NLR_mar).value;
  const double lhv = nonlocality_quantifier(b, NonlocalityKind::NLR_lhv).value;
  o.detail << "NLR_mar = " << mar << ", NLR_lhv = " << lhv;
  o.require(std::abs(mar - (std::sqrt(2.0) - 1)) <= 1e-6, "NLR_mar off");
  o.require(std::abs(lhv - (std::sqrt(2.0) - 1) / 2) <= 1e-6, "NLR_lhv off");
  return o;
}

Outcome criterion8() {
  Outcome o;
  const double q1 = npa_optimize(chsh_functional(), 1).value;
  o.detail << "level-1 CHSH = " << q1;
  o.require(std::abs(q1 - 2 * std::sqrt(2.0)) <= 1e-6, "level-1 CHSH optimum off");

  std::vector<double> pr(16);
  const Behaviour u = uniform_behaviour(2, 2, 2, 2);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) pr[u.index(a, b, x, y)] = ((a ^ b) == (x & y)) ? 0.5 : 0.0;
  const Behaviour box(2, 2, 2, 2, pr);
  const auto m = npa_membership(box, 1);
  o.detail << ", PR box " << (m.feasible ? "feasible" : "infeasible") << " (functional "
           << m.functional.evaluate(box) << " > bound " << m.bound << ")";
  o.require(!m.feasible && m.functional.evaluate(box) > m.bound + 1e-7, "PR box not separated");

  std::mt19937 rng(5);
  int infeasible = 0;
  double worst = 0;
  for (int k = 0; k < 30; ++k) {
    const auto b = measure(BipartiteState(2, 2, random_density(4, rng)), random_qubit_povms(2, rng),
                           random_qubit_povms(2, rng));
    const auto r = npa_membership(b, 2);
    worst = std::max(worst, r.robustness);
    infeasible += !r.feasible;
  }
  o.detail << ", 30 quantum behaviours at level 2: max robustness " << fmt(worst);
  o.require(infeasible == 0, std::to_string(infeasible) + " quantum behaviours rejected");
  return o;
}

Outcome criterion9(DualityLog& dual) {
  Outcome o;
  std::mt19937 rng(99);
  Worst viol, bound;
  double incompat_margin = -1e300;
  for (int k = 0; k < 20; ++k) {
    const BipartiteState st(2, 2, random_density(4, rng));
    const auto m = random_qubit_povms(2 + k % 2, rng);
    const auto a = steer(st, m);
    const auto b = measure(a, random_qubit_povms(2, rng));

    const auto ik = static_cast<IncompatKind>(k % 4);
    const auto ir = incompatibility_quantifier(m, ik);
    dual.result(ir.gap, to_string(ik));
    incompat_margin = std::max(incompat_margin, certificate_margin(ir.certificate, 2));
    viol.update(std::abs(ir.certificate.violation - ir.value), to_string(ik));

    const auto sk = static_cast<SteeringKind>(k % 7);
    const auto sr = steering_quantifier(a, sk);
    dual.result(sr.gap, to_string(sk));
    const auto sc = steering_certificate(sr, a);
    viol.update(std::abs(sc.violation - sr.value), to_string(sk));
    bound.update(sc.enumerated_bound - sc.bound, to_string(sk));

    const auto nk = static_cast<NonlocalityKind>(k % 7);
    const auto nr = nonlocality_quantifier(b, nk);
    dual.result(nr.gap, to_string(nk));
    const auto bc = bell_certificate(nr, b);
    viol.update(std::abs(bc.violation - nr.value), to_string(nk));
    bound.update(bc.enumerated_bound - bc.bound, to_string(nk));
  }
  o.detail << dual.solves << " solves, max gap " << fmt(dual.gap.value) << "; certificates: max |violation - value| "
           << fmt(viol.value) << ", max enumerated - bound " << fmt(bound.value)
           << ", incompatibility margin " << fmt(incompat_margin);
  o.require(dual.gap.value <= 1e-7, "gap too large (" + dual.gap.where + ")");
  o.require(viol.value <= 1e-6, "violation mismatch (" + viol.where + ")");
  o.require(bound.value <= 1e-9, "enumerated bound above certified bound (" + bound.where + ")");
  o.require(incompat_margin <= 1e-9, "incompatibility certificate violated by a parent");
  return o;
}

Outcome criterion10() {
  Outcome o;
  bool refused = false;
  try {
    reproduce("table2");
  } catch (const ValidationError&) {
    refused = true;
  }
  o.require(refused, "table2 not refused");

  std::mt19937 rng(10);
  std::uniform_real_distribution<double> u(-2e-3, 2e-3);
  double ns = 0, idem = 0;
  for (int k = 0; k < 20; ++k) {
    const auto base = measure(BipartiteState(2, 2, random_density(4, rng)),
                              random_qubit_povms(2, rng), random_qubit_povms(2, rng));
    std::vector<double> t = base.table();
    for (std::size_t s = 0; s < t.size(); s += 4) {
      double sum = 0;
      for (int i = 0; i < 4; ++i) sum += (t[s + i] = std::max(0.0, t[s + i] + u(rng)));
      for (int i = 0; i < 4; ++i) t[s + i] /= sum;
    }
    const auto p = ns_project(Behaviour(2, 2, 2, 2, t, true));
    ns = std::max(ns, p.behaviour.signalling_deviation());
    const auto q = ns_project(p.behaviour);
    for (std::size_t i = 0; i < t.size(); ++i)
      idem = std::max(idem, std::abs(q.behaviour.table()[i] - p.behaviour.table()[i]));
  }
  o.detail << "20 perturbed behaviours: NS deviation " << fmt(ns) << ", idempotence " << fmt(idem);
  o.require(ns <= 1e-10, "NS not restored");
  o.require(idem <= 1e-10, "projection not idempotent");

  // counts sampled from the isotropic behaviour at v = 0.9
  const Behaviour truth = isotropic_chsh(0.9);
  io::json counts = io::json::array();
  for (int x = 0; x < 2; ++x) {
    io::json row = io::json::array();
    for (int y = 0; y < 2; ++y) {
      std::discrete_distribution<int> d({truth.p(0, 0, x, y), truth.p(0, 1, x, y),
                                         truth.p(1, 0, x, y), truth.p(1, 1, x, y)});
      int n[4] = {0, 0, 0, 0};
      for (int s = 0; s < 20000; ++s) ++n[d(rng)];
      row.push_back({{n[0], n[1]}, {n[2], n[3]}});
    }
    counts.push_back(row);
  }
  const Behaviour raw = io::behaviour_from_input(io::json{{"counts", counts}});
  const auto proj = ns_project(raw);
  const double nl = nonlocality_quantifier(proj.behaviour, NonlocalityKind::NLR_lhv).value;
  const double exact = nonlocality_quantifier(truth, NonlocalityKind::NLR_lhv).value;
  o.detail << "; counts pipeline NLR_lhv = " << fmt(nl) << " (noiseless " << fmt(exact) << ")";
  o.require(proj.converged, "projection of counts did not converge");
  o.require(std::abs(nl - exact) < 0.02, "counts pipeline far from noiseless value");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  bool extended = false;
  app.add_option("--only", only, "criteria to run (default: all except 3 unless --extended)")
      ->delimiter(',');
  app.add_flag("--extended", extended, "also run the Bennet row of table1");
  CLI11_PARSE(app, argc, argv);

  std::set<int> run(only.begin(), only.end());
  if (run.empty()) {
    for (int i = 1; i <= 10; ++i) run.insert(i);
    if (!extended) run.erase(3);
  }

  DualityLog dual;
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria = {
      {1, {"analytic incompatibility values", criterion1}},
      {2, {"table1 Wittmann row", [] { return table1_row("Wittmann", false, 120.0); }}},
      {3, {"table1 Bennet row", [] { return table1_row("Bennet", true, 1800.0); }}},
      {4, {"activation thresholds and linearity", criterion4}},
      {5, {"tightness for pure states", [&] { return criterion5(dual); }}},
      {6, {"inequality chains", [&] { return criterion6(dual); }}},
      {7, {"LP-exact nonlocality values", criterion7}},
      {8, {"NPA validation", criterion8}},
      {9, {"duality and certificates", [&] { return criterion9(dual); }}},
      {10, {"no-signalling projection pipeline", criterion10}},
  };

  int failures = 0;
  for (int id : run) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << it->second.first << " ["
              << fmt(seconds_since(t0)) << " s]: " << o.detail.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
