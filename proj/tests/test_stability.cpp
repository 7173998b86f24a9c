#include <doctest.h>

#include "curveflow/errors.hpp"
#include "curveflow/geometry.hpp"
#include "curveflow/report_io.hpp"
#include "curveflow/stability.hpp"
#include "oracles.hpp"

using namespace curveflow;

namespace {

CompiledFlow poly(unsigned p) { return compile_flow(builtin_flow("polyharmonic", {p, {}, {}})); }
CompiledFlow example() { return compile_flow(builtin_flow("example32")); }

}  // namespace

TEST_SUITE("stability") {
  TEST_CASE("linear eigenvalues") {
    const CompiledFlow f = poly(1);
    CHECK(linear_eigenvalue(f, 0) == 0);
    CHECK(linear_eigenvalue(f, 1) == 0);
    CHECK(linear_eigenvalue(f, 2) == -12);
    for (unsigned p = 1; p <= 3; ++p) {
      CHECK(linear_eigenvalue(poly(p), 0) == 0);
      CHECK(linear_eigenvalue(poly(p), 1) == 0);
    }
    CHECK(linear_eigenvalue(example(), 1) == 0);
  }

  TEST_CASE("p_n_eps values") {
    CHECK(stability_polynomial<Rational>(poly(1), 1, 0, 2) == -12);
    CHECK(stability_polynomial<Rational>(example(), 1, 0, 2) == -12);
    CHECK(p_n_eps(poly(1), 1.0, 0.0, 2) == -12.0);
    for (unsigned p = 1; p <= 3; ++p) {
      for (int i = 0; i <= 20; ++i) {
        const Rational eps(i, 41);
        CHECK(stability_polynomial<Rational>(poly(p), 1, eps, 2) == oracle::polyharmonic_p2(p, eps));
      }
    }
  }

  TEST_CASE("P at W = 1 and eps = 0 is the linear eigenvalue") {
    for (const CompiledFlow& f : {poly(1), poly(2), example(), compile_flow(builtin_flow("gradient_elastic"))}) {
      for (int n = 0; n <= 12; ++n) CHECK(stability_polynomial<Rational>(f, 1, 0, n) == linear_eigenvalue(f, n));
    }
  }

  TEST_CASE("P is non-decreasing in eps") {
    for (const CompiledFlow& f : {poly(1), poly(2), example(), compile_flow(builtin_flow("gradient_elastic"))}) {
      for (int n = 1; n <= 10; ++n) {
        Rational prev = stability_polynomial<Rational>(f, Rational(3, 2), 0, n);
        for (int i = 1; i <= 30; ++i) {
          const Rational cur = stability_polynomial<Rational>(f, Rational(3, 2), Rational(i, 32), n);
          CHECK(cur >= prev);
          prev = cur;
        }
      }
    }
  }

  TEST_CASE("sup_p") {
    const SupResult r = sup_p(poly(1), 1.0, 0.0);
    CHECK(r.c == -12.0);
    CHECK(r.argmax_n == 2);
    const SupResult small = sup_p(poly(1), 0.1, 0.0);
    CHECK(small.c == doctest::Approx(-12.0 * 1e-4).epsilon(1e-12));
    CHECK(sup_p(example(), 1.0, 1.0 / 64).c <= -0.5);
    CHECK_THROWS_AS(sup_p(poly(1), 1.0, 0.25), Error);
    CHECK_THROWS_AS(require_stable(poly(1), 1.0, 0.2), CertificationError);
  }

  TEST_CASE("tail bound holds beyond the cutoff") {
    for (const CompiledFlow& f : {poly(1), example(), compile_flow(builtin_flow("gradient_elastic"))}) {
      for (double delta : {0.0, 0.01, 0.03}) {
        const SupResult r = sup_p(f, 1.3, delta);
        const TailBound tail = tail_bound(f, 1.3, 4 * delta);
        CHECK(r.tail_value < r.c);
        for (int n = 2; n <= 400; ++n) {
          CHECK(p_n_eps(f, 1.3, 4 * delta, n) <= tail(n) + 1e-9 * std::abs(tail(n)));
          if (n > r.tail_cutoff_n) CHECK(p_n_eps(f, 1.3, 4 * delta, n) < r.c);
        }
      }
    }
  }

  TEST_CASE("dominance") {
    CHECK(dominance_check(poly(1), 1.0, 0.01).ok);
    CHECK(dominance_check(example(), 1.0, 0.01).ok);
    CHECK(dominance_check(poly(1), 1.0, 0.0).ok);
    // grid oracle: P_2 >= P_n on a fine eps grid
    for (int i = 0; i <= 400; ++i) {
      const double eps = 0.04 * i / 400.0;
      for (int n = 3; n <= 30; ++n) CHECK(p_n_eps(example(), 1.0, eps, 2) >= p_n_eps(example(), 1.0, eps, n));
    }
  }

  TEST_CASE("max_delta") {
    const double d = max_delta(example(), 1.0, 1e-4);
    CHECK(std::abs(d - oracle::example_flow_delta_star()) <= 1e-4);
    CHECK(d > 1.0 / 32);
    CHECK(d <= oracle::example_flow_delta_star());
    CHECK_THROWS_WITH_AS(max_delta(compile_flow(parse_flow("F = -k")), 1.0),
                         doctest::Contains("unstable even at delta=0"), CertificationError);
  }

  TEST_CASE("max_delta does not depend on W for homogeneous flows") {
    CHECK(max_delta(poly(1), 0.5) == max_delta(poly(1), 2.0));
  }

  TEST_CASE("family criteria") {
    CHECK(family_criteria(FamilyKind::II, 2, {1, 1}));
    CHECK_FALSE(family_criteria(FamilyKind::II, 2, {10, 1}));
    CHECK(family_criteria(FamilyKind::I, 2, {0, 1}));
    CHECK_FALSE(family_criteria(FamilyKind::I, 2, {0, -1}));
    CHECK_FALSE(family_criteria(FamilyKind::II, 2, {1, -1}));
    // boundary: 3/4 |a_2| = 5/16 |a_1|
    CHECK(family_criteria(FamilyKind::II, 2, {Rational(12, 5), 1}));
    CHECK_FALSE(family_criteria(FamilyKind::II, 2, {Rational(12, 5) + Rational(1, 1000000), 1}));
    CHECK(family_criteria(FamilyKind::II, 3, {1, 1, -1}));
    CHECK_THROWS_AS(family_criteria(FamilyKind::II, 2, {1}), Error);
  }

  TEST_CASE("certify smooth data") {
    const SpectralState psi = make_initial(1.0, {{2, 0.001}}, false, 16);
    const StabilityCertificate c = certify(poly(1), psi);
    CHECK(c.W == 1.0);
    CHECK(c.c < 0.0);
    CHECK(c.dominance_ok);
    CHECK(c.predicted_rate < 0.0);
    CHECK(c.sharp_rate == -12.0);
    CHECK(c.seminorm == doctest::Approx(32 * 0.0005));
    CertifyOptions tight;
    tight.eps_report = 1e-6;
    CHECK(certify(poly(1), psi, tight).predicted_rate == doctest::Approx(-12.0).epsilon(1e-4));
  }

  TEST_CASE("certify refuses rough data") {
    CHECK_THROWS_WITH_AS(certify(poly(1), make_initial(1.0, {{2, 0.2}}, false, 16)), doctest::Contains("initial data too rough"),
                         CertificationError);
    // ||1 + 0.01 cos 2 theta||_5 = 0.16 exceeds delta_max ~ 0.043
    CHECK_THROWS_AS(certify(poly(1), make_initial(1.0, {{2, 0.01}}, false, 16)), CertificationError);
    CHECK_THROWS_AS(certify(compile_flow(parse_flow("F = -k")), make_initial(1.0, {}, false, 8)), CertificationError);
  }

  TEST_CASE("certificates are reproducible") {
    const SpectralState psi = make_initial(1.0, {{2, 0.001}, {3, 0.0002}}, true, 16);
    CHECK(to_json(certify(example(), psi)).dump() == to_json(certify(example(), psi)).dump());
  }
}
