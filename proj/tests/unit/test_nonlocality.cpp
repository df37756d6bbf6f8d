#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "helpers.hpp"
#include "quantrel/errors.hpp"
#include "quantrel/nonlocality.hpp"
#include "quantrel/steering.hpp"

using namespace quantrel;
using namespace testutil;

namespace {

const NonlocalityKind kAll[] = {NonlocalityKind::NLR,   NonlocalityKind::NLR_mar,
                                NonlocalityKind::NLR_lhv, NonlocalityKind::NLW,
                                NonlocalityKind::NLR_c, NonlocalityKind::NLR_c_lhv,
                                NonlocalityKind::NLW_c};

double nl(const Behaviour& b, NonlocalityKind k) { return nonlocality_quantifier(b, k).value; }

Behaviour relabel(const Behaviour& b) {
  // swap Alice's inputs and Bob's outcomes
  std::vector<double> t(b.table().size());
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int o = 0; o < 2; ++o) t[b.index(a, o, x, y)] = b.p(a, 1 - o, 1 - x, y);
  return Behaviour(2, 2, 2, 2, t);
}

Behaviour random_qubit_behaviour(std::mt19937& rng) {
  return measure(BipartiteState(2, 2, random_density(4, rng)), random_qubit_measurements(2, rng),
                 random_qubit_measurements(2, rng));
}

std::vector<double> perturbed(const Behaviour& b, double delta, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-delta, delta);
  std::vector<double> t = b.table();
  const int n = b.outcomes_a() * b.outcomes_b();
  for (std::size_t s = 0; s < t.size(); s += n) {
    double sum = 0;
    for (int k = 0; k < n; ++k) sum += (t[s + k] = std::max(0.0, t[s + k] + u(rng)));
    for (int k = 0; k < n; ++k) t[s + k] /= sum;
  }
  return t;
}

}  // namespace

TEST_CASE("isotropic CHSH behaviour at v = 1") {
  const auto b = isotropic_chsh(1.0);
  const double r2 = std::sqrt(2.0);
  // LP-exact kinds have closed forms on this behaviour
  CHECK(nl(b, NonlocalityKind::NLR_mar) == doctest::Approx(r2 - 1).epsilon(1e-7));
  CHECK(nl(b, NonlocalityKind::NLR_lhv) == doctest::Approx((r2 - 1) / 2).epsilon(1e-7));
  CHECK(nl(b, NonlocalityKind::NLR_c_lhv) == doctest::Approx((r2 - 1) / 2).epsilon(1e-7));
  // Noise Q with CHSH value -2 sqrt2: r = (2 sqrt2 - 2) / (2 + 2 sqrt2) = 3 - 2 sqrt2
  CHECK(nl(b, NonlocalityKind::NLR) == doctest::Approx(3 - 2 * r2).epsilon(1e-6));
  CHECK(nl(b, NonlocalityKind::NLR_c) == doctest::Approx(3 - 2 * r2).epsilon(1e-6));
  CHECK(nl(b, NonlocalityKind::NLW) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(nl(b, NonlocalityKind::NLW_c) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("local behaviours score zero") {
  for (auto k : kAll) CHECK(nl(isotropic_chsh(0.6), k) < 1e-7);
}

TEST_CASE("status reflects LP exactness") {
  CHECK(nonlocality_quantifier(isotropic_chsh(0.9), NonlocalityKind::NLR_lhv).exact);
  const auto r = nonlocality_quantifier(isotropic_chsh(0.9), NonlocalityKind::NLR, {1});
  CHECK_FALSE(r.exact);
  CHECK(r.level == 1);
}

TEST_CASE("local membership") {
  const auto loc = is_local(isotropic_chsh(0.6));
  REQUIRE(loc.local);
  const auto rebuilt = loc.model.behaviour();
  for (std::size_t i = 0; i < rebuilt.table().size(); ++i)
    CHECK(std::abs(rebuilt.table()[i] - isotropic_chsh(0.6).table()[i]) < 1e-8);
  const auto non = is_local(isotropic_chsh(0.8));
  CHECK_FALSE(non.local);
  CHECK(non.certificate.violation >= 1e-7);
  CHECK(non.certificate.functional.local_bound() <= non.certificate.bound + 1e-7);
}

TEST_CASE("orderings") {
  std::mt19937 rng(81);
  for (int k = 0; k < 4; ++k) {
    const auto b = measure(make_state(StateSpec::pure_theta(0.3 + 0.1 * k)),
                           random_qubit_measurements(2, rng), random_qubit_measurements(2, rng));
    CHECK(nl(b, NonlocalityKind::NLR_c) >= nl(b, NonlocalityKind::NLR) - 1e-7);
    CHECK(nl(b, NonlocalityKind::NLR_c_lhv) >= nl(b, NonlocalityKind::NLR_lhv) - 1e-7);
    CHECK(nl(b, NonlocalityKind::NLW_c) >= nl(b, NonlocalityKind::NLW) - 1e-7);
  }
}

TEST_CASE("steering bounds nonlocality") {
  std::mt19937 rng(83);
  for (int k = 0; k < 3; ++k) {
    const auto a = steer(make_state(StateSpec::pure_theta(0.35 + 0.15 * k)),
                         random_qubit_measurements(2, rng));
    const auto b = measure(a, random_qubit_measurements(2, rng));
    auto s = [&](SteeringKind kind) { return steering_quantifier(a, kind).value; };
    CHECK(s(SteeringKind::SR) >= nl(b, NonlocalityKind::NLR) - 1e-7);
    CHECK(s(SteeringKind::SR_c) >= nl(b, NonlocalityKind::NLR_c) - 1e-7);
    CHECK(s(SteeringKind::SR_red) >= nl(b, NonlocalityKind::NLR_mar) - 1e-7);
    CHECK(s(SteeringKind::SR_lhs) >= nl(b, NonlocalityKind::NLR_lhv) - 1e-7);
    CHECK(s(SteeringKind::SR_c_lhs) >= nl(b, NonlocalityKind::NLR_c_lhv) - 1e-7);
    CHECK(s(SteeringKind::SW) >= nl(b, NonlocalityKind::NLW) - 1e-7);
    CHECK(s(SteeringKind::SW_c) >= nl(b, NonlocalityKind::NLW_c) - 1e-7);
  }
}

TEST_CASE("relabeling invariance") {
  std::mt19937 rng(85);
  const auto b = measure(make_state(StateSpec::pure_theta(0.6)), random_qubit_measurements(2, rng),
                         random_qubit_measurements(2, rng));
  for (auto k : kAll) CHECK(std::abs(nl(b, k) - nl(relabel(b), k)) < 1e-7);
}

TEST_CASE("certificates on random behaviours") {
  std::mt19937 rng(87);
  for (int k = 0; k < 20; ++k) {
    const auto b = random_qubit_behaviour(rng);
    const auto kind = kAll[k % 7];
    const auto r = nonlocality_quantifier(b, kind);
    const auto c = bell_certificate(r, b);
    CHECK(std::abs(c.violation - r.value) < 1e-6);
    CHECK(c.enumerated_bound <= c.bound + 1e-7);
    CHECK(c.level_relaxed == !is_lp_exact(kind));
  }
}

TEST_CASE("ns projection") {
  const auto b = isotropic_chsh(0.9);
  const auto same = ns_project(b);
  CHECK(same.converged);
  CHECK(same.divergence < 1e-12);

  std::mt19937 rng(89);
  for (int k = 0; k < 20; ++k) {
    const auto base = random_qubit_behaviour(rng);
    const double delta = 1e-3 * (1 + k % 4);
    const Behaviour raw(2, 2, 2, 2, perturbed(base, delta, rng), true);
    const auto p = ns_project(raw);
    CHECK(p.converged);
    CHECK(p.kkt_residual < 1e-9);
    CHECK(p.behaviour.signalling_deviation() < 1e-12);
    CHECK(p.divergence >= -1e-15);
    CHECK(p.divergence < 10 * delta * delta);
    // no-signalling input is a fixed point
    const auto again = ns_project(p.behaviour);
    for (std::size_t i = 0; i < raw.table().size(); ++i)
      CHECK(std::abs(again.behaviour.table()[i] - p.behaviour.table()[i]) < 1e-9);
  }

  std::vector<double> bad = b.table();
  bad[0] = -0.1;
  CHECK_THROWS_AS(ns_project(Behaviour(2, 2, 2, 2, bad, true, 1.0)), ValidationError);
}

TEST_CASE("kind parsing") {
  for (auto k : kAll) CHECK(parse_nonlocality_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_nonlocality_kind("NLQ"), ValidationError);
}
