#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "helpers.hpp"
#include "quantrel/errors.hpp"
#include "quantrel/incompatibility.hpp"

using namespace quantrel;
using namespace testutil;

namespace {

// Two unbiased qubit measurements with Bloch vectors eta*n0, eta*n1 are jointly measurable
// iff eta (|n0 + n1| + |n0 - n1|) <= 2. Bisect for the white-noise robustness.
double busch_random_robustness(const RVector& n0, const RVector& n1) {
  const double s = (n0 + n1).norm() + (n0 - n1).norm();
  double lo = 0, hi = 10;
  for (int i = 0; i < 200; ++i) {
    const double t = 0.5 * (lo + hi);
    (s / (1 + t) <= 2 ? hi : lo) = t;
  }
  return hi;
}

RVector vec(const std::array<double, 3>& a) {
  RVector v(3);
  v << a[0], a[1], a[2];
  return v;
}

}  // namespace

TEST_CASE("joint measurability") {
  const auto z = is_jointly_measurable(pauli_measurements("Z"));
  CHECK(z.jointly_measurable);
  CHECK(is_jointly_measurable(pauli_measurements("ZZ")).jointly_measurable);

  const auto xz = is_jointly_measurable(pauli_measurements("XZ"));
  CHECK_FALSE(xz.jointly_measurable);
  CHECK(xz.certificate.violation >= 1e-7);
  CHECK(certificate_margin(xz.certificate, 2) < 1e-7);

  const auto noisy = is_jointly_measurable(noisy_xz(0.65));
  REQUIRE(noisy.jointly_measurable);
  const auto m = noisy_xz(0.65);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a)
      CHECK(max_abs_diff(noisy.parent.marginal(x, a).matrix(), m.effect(x, a).matrix()) < 1e-8);
  for (const auto& g : noisy.parent.effects) CHECK(is_psd(g, 1e-9));
}

TEST_CASE("random robustness of sharp Pauli sets") {
  CHECK(incompatibility_quantifier(pauli_measurements("XZ"), IncompatKind::random_robustness)
            .value == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-7));
  CHECK(incompatibility_quantifier(pauli_measurements("XYZ"), IncompatKind::random_robustness)
            .value == doctest::Approx(std::sqrt(3.0) - 1).epsilon(1e-7));
}

TEST_CASE("random robustness matches the pairwise criterion") {
  std::mt19937 rng(41);
  for (int k = 0; k < 8; ++k) {
    const auto d0 = random_direction(rng), d1 = random_direction(rng);
    const double r =
        incompatibility_quantifier(bloch_measurements({d0, d1}), IncompatKind::random_robustness)
            .value;
    CHECK(std::abs(r - busch_random_robustness(vec(d0), vec(d1))) < 1e-6);
  }
}

TEST_CASE("jointly measurable sets score zero for every kind") {
  for (auto kind : {IncompatKind::robustness, IncompatKind::random_robustness,
                    IncompatKind::jm_robustness, IncompatKind::weight}) {
    CHECK(incompatibility_quantifier(noisy_xz(0.6), kind).value < 1e-7);
  }
}

TEST_CASE("witnesses reconstruct the definitions") {
  const auto m = pauli_measurements("XYZ");
  for (auto kind : {IncompatKind::robustness, IncompatKind::random_robustness,
                    IncompatKind::jm_robustness}) {
    const auto r = incompatibility_quantifier(m, kind);
    const auto g = r.parent(3, 2);
    for (int x = 0; x < 3; ++x)
      for (int a = 0; a < 2; ++a) {
        const CMatrix mix = (m.effect(x, a).matrix() + r.noise_scaled[x][a].matrix()) / (1 + r.value);
        CHECK(max_abs_diff(g.marginal(x, a).matrix(), mix) < 1e-8);
      }
    CHECK(std::abs(r.certificate.violation - r.value) < 1e-7);
    CHECK(certificate_margin(r.certificate, 2) < 1e-7);
  }
  const auto nm = noisy_xz(0.9);
  const auto w = incompatibility_quantifier(nm, IncompatKind::weight);
  REQUIRE(w.value < 1.0);
  const auto g = w.parent(2, 2);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      const CMatrix mix = (1 - w.value) * g.marginal(x, a).matrix() + w.noise_scaled[x][a].matrix();
      CHECK(max_abs_diff(mix, nm.effect(x, a).matrix()) < 1e-8);
    }
}

TEST_CASE("noise restriction and subset monotonicity") {
  std::mt19937 rng(43);
  for (int k = 0; k < 5; ++k) {
    const auto m = random_qubit_measurements(3, rng);
    const double ir = incompatibility_quantifier(m, IncompatKind::robustness).value;
    CHECK(ir <= incompatibility_quantifier(m, IncompatKind::random_robustness).value + 1e-7);
    CHECK(ir <= incompatibility_quantifier(m, IncompatKind::jm_robustness).value + 1e-7);
    for (auto kind : {IncompatKind::robustness, IncompatKind::weight}) {
      const double full = incompatibility_quantifier(m, kind).value;
      CHECK(incompatibility_quantifier(m.select({0, 2}), kind).value <= full + 1e-7);
    }
  }
}

TEST_CASE("unitary invariance") {
  std::mt19937 rng(47);
  const auto m = random_qubit_measurements(2, rng);
  const auto u = random_unitary(2, rng);
  for (auto kind : {IncompatKind::robustness, IncompatKind::random_robustness,
                    IncompatKind::jm_robustness, IncompatKind::weight}) {
    CHECK(std::abs(incompatibility_quantifier(m, kind).value -
                   incompatibility_quantifier(m.conjugated(u), kind).value) < 1e-7);
  }
}

TEST_CASE("strategy cap and kind parsing") {
  CHECK_THROWS_AS(incompatibility_quantifier(pauli_measurements("XYZ"), IncompatKind::robustness,
                                             {}, 4),
                  ResourceError);
  CHECK(parse_incompat_kind("IR_r") == IncompatKind::random_robustness);
  CHECK(to_string(IncompatKind::weight) == "IW");
  CHECK_THROWS_AS(parse_incompat_kind("IX"), ValidationError);
}
