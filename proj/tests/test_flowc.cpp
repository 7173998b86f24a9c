#include <doctest.h>

#include <random>

#include "curveflow/errors.hpp"
#include "curveflow/flowc.hpp"
#include "oracles.hpp"

using namespace curveflow;

namespace {

DiffPoly term(Rational c, Exponents e) { return DiffPoly::normalize({Monomial{std::move(c), std::move(e)}}); }

const DiffPoly k = DiffPoly::curvature();
const DiffPoly k1 = DiffPoly::derivative(1);
const DiffPoly k2 = DiffPoly::derivative(2);

// Every d_s adds one power of k, so each curvature equation is homogeneous.
bool homogeneous(const DiffPoly& p, unsigned degree) {
  for (const auto& t : p.terms()) {
    if (total_degree(t.exps) != degree) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("flowc") {
  TEST_CASE("parse and expand basic speeds") {
    CHECK(expand_arclength(parse_flow("F = -(ds(k,2))")) == -(k * k1 * k1 + k * k * k2));
    CHECK(expand_arclength(parse_flow("F = -(k * ds(k,2))")) == -(k * (k * k1 * k1 + k * k * k2)));
    CHECK(expand_arclength(parse_flow("ds(k,1)")) == k * k1);
    CHECK(expand_arclength(parse_flow("k")) == k);
    CHECK(expand_arclength(parse_flow("F = 3/2 * k^2 - 0.5 * k")) == Rational(3, 2) * k * k - Rational(1, 2) * k);
  }

  TEST_CASE("ds(k,2) against an independent series expansion") {
    const DiffPoly p = expand_arclength(parse_flow("ds(k,2)"));
    for (double t : {0.1, 1.3, 2.9}) {
      const auto jet = oracle::trig_jet(1.5, {0.2, 0.1}, {0.05, -0.1}, t, 6);
      const oracle::Series ks = oracle::series_from_jet(jet);
      CHECK(eval_at(p, jet) == doctest::Approx(oracle::arc(ks, ks, 2).at0()).epsilon(1e-12));
    }
  }

  TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_flow("F = ds(k,0)"), ParseError);
    try {
      parse_flow("F = k + * k");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.position() == 8);
    }
    CHECK_THROWS_AS(parse_flow("F = ds(x,2)"), ParseError);
    CHECK_THROWS_AS(parse_flow("F = (k"), ParseError);
    CHECK_THROWS_AS(parse_flow("F = k k"), ParseError);
    CHECK_THROWS_AS(parse_flow("F = 1/0"), ParseError);
    CHECK_THROWS_AS(parse_flow("F = theta"), ParseError);
  }

  TEST_CASE("comments and source round trip") {
    const FlowExpr f = parse_flow("# gradient flow\nF = ds(k,4) + k^2 * ds(k,2) - 1/2 * k * ds(k,1)^2\n");
    const FlowExpr g = parse_flow(to_source(*f.root));
    CHECK(expand_arclength(f) == expand_arclength(g));
  }

  TEST_CASE("curvature_pde of zero is zero") { CHECK(curvature_pde(DiffPoly{}).is_zero()); }

  TEST_CASE("polyharmonic p=1 equation") {
    const DiffPoly pde = curvature_pde(expand_arclength(parse_flow("F = -ds(k,2)")));
    const DiffPoly expected = term(-1, {4, 0, 0, 0, 1}) + term(-1, {4, 0, 1}) + term(-1, {1, 4}) + term(-11, {2, 2, 1}) +
                              term(-4, {3, 0, 2}) + term(-7, {3, 1, 0, 1}) + term(-1, {3, 2});
    CHECK(pde == expected);
    CHECK(homogeneous(pde, 5));
    // the same equation written as a right-hand side in arclength form
    CHECK(expand_arclength(parse_flow("-(ds(k,4) + k^2 * ds(k,2))")) == expected);
  }

  TEST_CASE("example flow equation") {
    const DiffPoly pde = curvature_pde(expand_arclength(parse_flow("F = -(k * ds(k,2))")));
    CHECK(pde.size() == 7);
    CHECK(pde.coefficient({5, 0, 0, 0, 1}) == -1);
    CHECK(pde.coefficient({5, 0, 1}) == -1);
    CHECK(pde.coefficient({4, 0, 2}) == -5);
    CHECK(pde.coefficient({4, 2}) == -1);
    CHECK(pde.coefficient({2, 4}) == -4);
    CHECK(pde.coefficient({3, 2, 1}) == -21);
    CHECK(pde.coefficient({4, 1, 0, 1}) == -9);
    CHECK(homogeneous(pde, 6));
  }

  TEST_CASE("example flow equation matches its arclength form numerically") {
    // dk/dt = -k k_ssss - k^3 k_ss - k_ss^2 - 2 k_s k_sss
    const DiffPoly pde = curvature_pde(expand_arclength(parse_flow("F = -(k * ds(k,2))")));
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int i = 0; i < 20; ++i) {
      const auto jet = oracle::trig_jet(1.0 + u(rng), {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, 0.0, 8);
      const oracle::Series ks = oracle::series_from_jet(jet);
      const double s1 = oracle::arc(ks, ks, 1).at0();
      const double s2 = oracle::arc(ks, ks, 2).at0();
      const double s3 = oracle::arc(ks, ks, 3).at0();
      const double s4 = oracle::arc(ks, ks, 4).at0();
      const double kk = jet[0];
      const double rhs = -kk * s4 - kk * kk * kk * s2 - s2 * s2 - 2 * s1 * s3;
      CHECK(eval_at(pde, jet) == doctest::Approx(rhs).epsilon(1e-11));
    }
  }

  TEST_CASE("classify polyharmonic p=1") {
    const CompiledFlow f = compile_flow(builtin_flow("polyharmonic", {1, {}, {}}));
    CHECK(f.p == 2);
    CHECK(f.M == 4);
    CHECK(f.lead_sign == -1);
    CHECK(f.lead_mag == 1);
    REQUIRE(f.a_table.size() == 1);
    CHECK(f.a_table.at({1, 4}) == -1);
    CHECK(f.structure_ok);
    CHECK(f.reconstruct() == f.pde);
  }

  TEST_CASE("classify polyharmonic p=1..3 shape") {
    for (unsigned p = 1; p <= 3; ++p) {
      const CompiledFlow f = compile_flow(builtin_flow("polyharmonic", {p, {}, {}}));
      const int sign = p % 2 == 0 ? 1 : -1;
      CHECK(f.p == p + 1);
      CHECK(f.M == 2 * p + 2);
      CHECK(f.lead_sign == sign);
      REQUIRE(f.a_table.size() == 1);
      CHECK(f.a_table.at({p, 2 * p + 2}) == sign);
      CHECK(f.structure_ok);
      CHECK(f.reconstruct() == f.pde);
    }
  }

  TEST_CASE("classify example flow and gradient flow") {
    const CompiledFlow e = compile_flow(builtin_flow("example32"));
    CHECK(e.p == 2);
    CHECK(e.M == 5);
    REQUIRE(e.a_table.size() == 1);
    CHECK(e.a_table.at({1, 5}) == -1);
    CHECK(e.structure_ok);

    const CompiledFlow g = compile_flow(builtin_flow("gradient_elastic"));
    CHECK(g.p == 3);
    CHECK(g.M == 6);
    CHECK(g.lead_sign == 1);
    CHECK(g.a_table.at({2, 6}) == 2);
    CHECK(g.a_table.at({1, 6}) == 1);
    CHECK(g.structure_ok);
    CHECK(g.reconstruct() == g.pde);
  }

  TEST_CASE("curve shortening violates the structure condition") {
    const CompiledFlow f = compile_flow(parse_flow("F = -k"));
    CHECK_FALSE(f.structure_ok);
    bool found = false;
    for (const auto& v : f.violations) found = found || v == "term k^3 has derivative degree 0";
    CHECK(found);
  }

  TEST_CASE("flip_sign negates the speed") {
    const CompiledFlow a = compile_flow(parse_flow("F = ds(k,2)"), true);
    const CompiledFlow b = compile_flow(parse_flow("F = -ds(k,2)"));
    CHECK(a.pde == b.pde);
    const CompiledFlow wrong = compile_flow(parse_flow("F = ds(k,2)"));
    CHECK_FALSE(wrong.structure_ok);
  }

  TEST_CASE("leading magnitude other than one") {
    const CompiledFlow f = compile_flow(parse_flow("F = -2 * ds(k,2)"));
    CHECK(f.lead_mag == 2);
    CHECK(f.a_table.at({1, 4}) == -2);
    CHECK(f.reconstruct() == f.pde);
  }

  TEST_CASE("classification errors") {
    CHECK_THROWS_AS(classify(DiffPoly{}), ClassificationError);
    CHECK_THROWS_AS(classify(k * k), ClassificationError);
    CHECK_THROWS_AS(classify(k * k1), ClassificationError);  // odd top order
    CHECK_THROWS_AS(classify(k2 * k2), ClassificationError);
    CHECK_THROWS_AS(classify(k1 * k2), ClassificationError);
    CHECK_THROWS_AS(classify(k * k2 + k * k * k2), ClassificationError);
  }

  TEST_CASE("builtin families") {
    const FlowExpr f = builtin_flow_from_spec("familyII(2, 1, 1)");
    CHECK(expand_arclength(f) == expand_arclength(parse_flow("ds(k,4) + k^2 * ds(k,2)")));
    const FlowExpr i = builtin_flow_from_spec("familyI(2, 1/2, 1)");
    CHECK(expand_arclength(i) == expand_arclength(parse_flow("1/2 * ds(k,2) + ds(k,4)")));

    BuiltinParams ge{2, {1, 1}, {ArclengthTerm{Rational(-1, 2), {1, 2}}}};
    CHECK(compile_flow(builtin_flow("familyII", ge)).pde == compile_flow(builtin_flow("gradient_elastic")).pde);

    BuiltinParams bad{2, {1, 1}, {ArclengthTerm{1, {2, 1}}}};
    CHECK_THROWS_AS(builtin_flow("familyII", bad), Error);
    BuiltinParams high{2, {1, 1}, {ArclengthTerm{1, {0, 1, 0, 0, 1}}}};
    CHECK_THROWS_AS(builtin_flow("familyII", high), Error);
    CHECK_THROWS_AS(builtin_flow("nosuchflow"), Error);
    CHECK_THROWS_AS(builtin_flow_from_spec("familyII(2, 1)"), Error);
  }
}
