#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "helpers.hpp"
#include "quantrel/errors.hpp"
#include "quantrel/incompatibility.hpp"
#include "quantrel/steering.hpp"

using namespace quantrel;
using namespace testutil;

namespace {

const SteeringKind kAll[] = {SteeringKind::SR,   SteeringKind::SR_red, SteeringKind::SR_lhs,
                             SteeringKind::SW,   SteeringKind::SR_c,   SteeringKind::SR_c_lhs,
                             SteeringKind::SW_c};

Assemblage werner_xyz(double v) {
  return steer(make_state(StateSpec::werner(v)), pauli_measurements("XYZ"));
}

Assemblage relabel(const Assemblage& a, const std::vector<int>& inputs, bool swap_outcomes) {
  std::vector<std::vector<HermitianOperator>> mem;
  for (int x : inputs) {
    auto row = a.members()[x];
    if (swap_outcomes) std::reverse(row.begin(), row.end());
    mem.push_back(row);
  }
  return Assemblage(mem);
}

}  // namespace

TEST_CASE("LHS membership") {
  const BipartiteState prod(2, 2, tensor(HermitianOperator::identity(2) * 0.5,
                                         HermitianOperator::identity(2) * 0.5));
  const auto p = has_lhs_model(steer(prod, pauli_measurements("XYZ")));
  CHECK(p.has_model);

  const auto half = has_lhs_model(werner_xyz(0.5));
  REQUIRE(half.has_model);
  const auto rebuilt = half.model.assemblage();
  const auto a = werner_xyz(0.5);
  for (int x = 0; x < 3; ++x)
    for (int o = 0; o < 2; ++o)
      CHECK(max_abs_diff(rebuilt.member(x, o).matrix(), a.member(x, o).matrix()) < 1e-8);

  const auto one = has_lhs_model(werner_xyz(1.0));
  CHECK_FALSE(one.has_model);
  CHECK(one.certificate.violation >= 1e-7);
}

TEST_CASE("LHS assemblages score zero for every kind") {
  for (auto k : kAll) CHECK(steering_quantifier(werner_xyz(0.5), k).value < 1e-7);
}

TEST_CASE("reduced-state robustness equals the random incompatibility robustness") {
  const auto a = steer(make_state(StateSpec::max_entangled(2)), pauli_measurements("XYZ"));
  CHECK(steering_quantifier(a, SteeringKind::SR_red).value ==
        doctest::Approx(std::sqrt(3.0) - 1).epsilon(1e-7));
}

TEST_CASE("witnesses reconstruct the decompositions") {
  const auto a = werner_xyz(0.9);
  for (auto k : {SteeringKind::SR, SteeringKind::SR_c, SteeringKind::SR_red}) {
    const auto r = steering_quantifier(a, k);
    const auto lhs = r.model(3, 2).assemblage();
    for (int x = 0; x < 3; ++x)
      for (int o = 0; o < 2; ++o) {
        const CMatrix mix =
            (a.member(x, o).matrix() + r.noise_scaled[x][o].matrix()) / (1 + r.value);
        CHECK(max_abs_diff(lhs.member(x, o).matrix(), mix) < 1e-8);
      }
  }
  const auto w = steering_quantifier(a, SteeringKind::SW);
  const auto lhs = w.model(3, 2).assemblage();
  for (int x = 0; x < 3; ++x)
    for (int o = 0; o < 2; ++o) {
      const CMatrix mix = (1 - w.value) * lhs.member(x, o).matrix() + w.noise_scaled[x][o].matrix();
      CHECK(max_abs_diff(mix, a.member(x, o).matrix()) < 1e-8);
    }
}

TEST_CASE("consistent variants dominate") {
  std::mt19937 rng(51);
  for (int k = 0; k < 4; ++k) {
    const auto a = steer(BipartiteState(2, 2, random_density(4, rng)),
                         random_qubit_measurements(2 + k % 2, rng));
    auto v = [&](SteeringKind kind) { return steering_quantifier(a, kind).value; };
    CHECK(v(SteeringKind::SR_c) >= v(SteeringKind::SR) - 1e-7);
    CHECK(v(SteeringKind::SR_c_lhs) >= v(SteeringKind::SR_lhs) - 1e-7);
    CHECK(v(SteeringKind::SW_c) >= v(SteeringKind::SW) - 1e-7);
  }
}

TEST_CASE("incompatibility bounds steering") {
  std::mt19937 rng(53);
  for (int k = 0; k < 4; ++k) {
    const auto m = random_qubit_measurements(2, rng);
    const auto a = steer(BipartiteState(2, 2, random_density(4, rng)), m);
    auto s = [&](SteeringKind kind) { return steering_quantifier(a, kind).value; };
    auto i = [&](IncompatKind kind) { return incompatibility_quantifier(m, kind).value; };
    CHECK(i(IncompatKind::robustness) >= s(SteeringKind::SR_c) - 1e-7);
    CHECK(s(SteeringKind::SR_c) >= s(SteeringKind::SR) - 1e-7);
    CHECK(i(IncompatKind::random_robustness) >= s(SteeringKind::SR_red) - 1e-7);
    CHECK(i(IncompatKind::jm_robustness) >= s(SteeringKind::SR_c_lhs) - 1e-7);
    CHECK(s(SteeringKind::SR_c_lhs) >= s(SteeringKind::SR_lhs) - 1e-7);
    CHECK(i(IncompatKind::weight) >= s(SteeringKind::SW_c) - 1e-7);
    CHECK(s(SteeringKind::SW_c) >= s(SteeringKind::SW) - 1e-7);
  }
}

TEST_CASE("tightness for pure full-rank states") {
  std::mt19937 rng(57);
  for (double theta : {M_PI / 8, M_PI / 6, M_PI / 4}) {
    const auto m = random_qubit_measurements(2, rng);
    const auto a = steer(make_state(StateSpec::pure_theta(theta)), m);
    CHECK(std::abs(incompatibility_quantifier(m, IncompatKind::robustness).value -
                   steering_quantifier(a, SteeringKind::SR_c).value) < 1e-6);
    CHECK(std::abs(incompatibility_quantifier(m, IncompatKind::random_robustness).value -
                   steering_quantifier(a, SteeringKind::SR_red).value) < 1e-6);
    CHECK(std::abs(incompatibility_quantifier(m, IncompatKind::jm_robustness).value -
                   steering_quantifier(a, SteeringKind::SR_c_lhs).value) < 1e-6);
    CHECK(std::abs(incompatibility_quantifier(m, IncompatKind::weight).value -
                   steering_quantifier(a, SteeringKind::SW_c).value) < 1e-6);
  }
}

TEST_CASE("unitary and relabeling invariance") {
  std::mt19937 rng(59);
  const auto a = steer(BipartiteState(2, 2, random_density(4, rng)), random_qubit_measurements(3, rng));
  const auto u = random_unitary(2, rng);
  const auto ua = a.conjugated(u);
  const auto ra = relabel(a, {2, 0, 1}, true);
  for (auto k : kAll) {
    const double v = steering_quantifier(a, k).value;
    CHECK(std::abs(v - steering_quantifier(ua, k).value) < 1e-7);
    CHECK(std::abs(v - steering_quantifier(ra, k).value) < 1e-7);
  }
}

TEST_CASE("certificates") {
  const auto lhs = werner_xyz(0.4);
  const auto c0 = steering_certificate(steering_quantifier(lhs, SteeringKind::SR), lhs);
  CHECK(std::abs(c0.violation) < 1e-7);

  const auto a = werner_xyz(1.0);
  const auto c = steering_certificate(steering_quantifier(a, SteeringKind::SR), a);
  // brute-force LHS maximum over all 27 strategies
  double best = -1e300;
  for (const auto& s : enumerate_strategies(3, 2)) {
    CMatrix sum = CMatrix::Zero(2, 2);
    for (int x = 0; x < 3; ++x) sum += c.coefficients[x][s.assignment[x]].matrix();
    best = std::max(best, max_eigenvalue(HermitianOperator(sum)));
  }
  CHECK(std::abs(best - c.enumerated_bound) < 1e-12);
  CHECK(c.enumerated_bound <= c.bound + 1e-7);
  CHECK(c.violation > 0.1);
  CHECK(!format_inequality(c).empty());
}

TEST_CASE("certificate violation tracks the quantifier on random assemblages") {
  std::mt19937 rng(61);
  for (int k = 0; k < 20; ++k) {
    const auto a = steer(BipartiteState(2, 2, random_density(4, rng)),
                         random_qubit_measurements(2 + k % 2, rng));
    const auto kind = kAll[k % 7];
    const auto r = steering_quantifier(a, kind);
    const auto c = steering_certificate(r, a);
    CHECK(std::abs(c.violation - r.value) < 1e-6);
    CHECK(c.enumerated_bound <= c.bound + 1e-7);
  }
}

TEST_CASE("kind parsing") {
  for (auto k : kAll) CHECK(parse_steering_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_steering_kind("SR_x"), ValidationError);
}
