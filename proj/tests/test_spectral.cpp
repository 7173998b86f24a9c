#include <doctest.h>

#include <random>
#include <sstream>

#include "curveflow/errors.hpp"
#include "curveflow/spectral.hpp"
#include "curveflow/stability.hpp"
#include "oracles.hpp"

using namespace curveflow;

namespace {

CompiledFlow poly1() { return compile_flow(builtin_flow("polyharmonic", {1, {}, {}})); }
CompiledFlow example() { return compile_flow(builtin_flow("example32")); }

SpectralState random_state(std::mt19937& rng, int N, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  SpectralState s(N, 1.0 + u(rng));
  for (int n = 1; n <= N; ++n) s.coeffs[static_cast<std::size_t>(n)] = {u(rng) / n, u(rng) / n};
  return s;
}

double max_rel(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("efficient sizes") {
    CHECK(efficient_size(1) == 2);
    CHECK(efficient_size(7) == 8);
    CHECK(efficient_size(97) == 100);
    CHECK(efficient_size(121) == 125);
  }

  TEST_CASE("samples of simple states") {
    SpectralState c(4, 1.0);
    for (double v : to_samples(c, 9)) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    SpectralState s(4, 1.0);
    s.coeffs[2] = 0.005;
    const auto v = to_samples(s, 16);
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double t = 2 * oracle::kPi * j / 16.0;
      CHECK(v[j] == doctest::Approx(1.0 + 0.01 * std::cos(2 * t)).epsilon(1e-15));
    }
  }

  TEST_CASE("transform round trip") {
    std::mt19937 rng(3);
    const SpectralState s = random_state(rng, 16, 0.2);
    const SpectralState r = from_samples(to_samples(s, 33), 16);
    CHECK(max_rel(r.coeffs, s.coeffs) < 1e-12);
    const auto v = to_samples(s, 40);
    for (std::size_t j = 0; j < v.size(); j += 7) CHECK(v[j] == doctest::Approx(oracle::eval_series(s, 2 * oracle::kPi * j / 40.0)));
    CHECK_THROWS_AS(to_samples(s, 32), Error);
    CHECK_THROWS_AS(from_samples(v, 20), Error);
  }

  TEST_CASE("derivative samples") {
    SpectralState s(4, 2.0);
    s.coeffs[3] = Complex(0.0, -0.05);  // 0.1 sin 3 theta
    const auto d2 = derivative_samples(s, 2, 16);
    for (std::size_t j = 0; j < d2.size(); ++j) {
      const double t = 2 * oracle::kPi * j / 16.0;
      CHECK(d2[j] == doctest::Approx(-0.9 * std::sin(3 * t)).epsilon(1e-12).scale(1.0));
    }
  }

  TEST_CASE("constant states are stationary") {
    for (const CompiledFlow& f : {poly1(), example()}) {
      const SpectralState c(6, 1.7);
      for (const Complex& v : rhs_direct(c, f).total()) CHECK(std::abs(v) < 1e-14);
      for (const Complex& v : rhs_pseudospectral(c, f)) CHECK(std::abs(v) < 1e-12);
      const SpectralState next = step(c, f, 1e-3);
      CHECK(max_rel(next.coeffs, c.coeffs) < 1e-15);
    }
  }

  TEST_CASE("pseudospectral right-hand side matches direct convolution") {
    std::mt19937 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
      const int N = 4 + trial % 5;
      const SpectralState s = random_state(rng, N, 0.3);
      for (const CompiledFlow& f : {poly1(), example()}) {
        worst = std::max(worst, max_rel(rhs_pseudospectral(s, f), rhs_direct(s, f).total()));
      }
    }
    CHECK(worst < 1e-10);
  }

  TEST_CASE("direct right-hand side: split, reality, cap") {
    std::mt19937 rng(8);
    const SpectralState s = random_state(rng, 4, 0.2);
    const RhsSplit split = rhs_direct(s, poly1());
    CHECK(std::abs(split.total()[0].imag()) < 1e-15);
    for (int n = 0; n <= 4; ++n) {
      const auto i = static_cast<std::size_t>(n);
      CHECK(std::abs(split.diagonal[i] - p_n_eps(poly1(), s.average(), 0.0, n) * s.coeffs[i]) < 1e-14);
    }
    CHECK_THROWS_AS(rhs_direct(SpectralState(9, 1.0), poly1()), Error);
    CHECK_NOTHROW(rhs_direct(SpectralState(9, 1.0), poly1(), 9));
  }

  TEST_CASE("small-amplitude growth rate approaches the linear eigenvalue") {
    auto rate = [](double a) {
      SpectralState s(6, 1.0);
      s.coeffs[2] = a;
      return (rhs_direct(s, poly1()).total()[2] / s.coeffs[2]).real();
    };
    const double r1 = rate(1e-3);
    const double r2 = rate(5e-4);
    CHECK(std::abs(r1 + 12.0) < 1e-2);
    CHECK(std::abs((2 * r2 - r1) + 12.0) < std::abs(r1 + 12.0));
  }

  TEST_CASE("phi1") {
    CHECK(phi1(0.0) == 1.0);
    for (double z : {-1e-4, -5e-5, 1e-6, 9.99e-5}) CHECK(phi1(z) == doctest::Approx(std::expm1(z) / z).epsilon(1e-15));
    CHECK(phi1(-1e-4 * (1 - 1e-12)) == doctest::Approx(phi1(-1e-4 * (1 + 1e-12))).epsilon(1e-14));
    CHECK(phi1(-50.0) == doctest::Approx(1.0 / 50.0).epsilon(1e-15));
  }

  TEST_CASE("integrating factor is exact on the diagonal") {
    std::mt19937 rng(4);
    const SpectralState s = random_state(rng, 12, 0.1);
    const double dt = 1e-3;
    const SpectralState next = exponential_euler(s, poly1(), {}, dt);
    for (int n = 0; n <= 12; ++n) {
      const auto i = static_cast<std::size_t>(n);
      const Complex expect = std::exp(diagonal_rate(poly1(), s.average(), n) * dt) * s.coeffs[i];
      CHECK(std::abs(next.coeffs[i] - expect) <= 1e-13 * std::abs(expect));
    }
  }

  TEST_CASE("first-order consistency") {
    std::mt19937 rng(6);
    const SpectralState s = random_state(rng, 8, 0.05);
    const auto f = rhs_pseudospectral(s, poly1());
    auto err = [&](double dt) {
      const SpectralState n = step(s, poly1(), dt);
      double e = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) e = std::max(e, std::abs((n.coeffs[i] - s.coeffs[i]) / dt - f[i]));
      return e;
    };
    const double e1 = err(1e-5), e2 = err(5e-6), e3 = err(2.5e-6);
    CHECK(e2 < 0.6 * e1);
    CHECK(e3 < 0.6 * e2);
  }

  TEST_CASE("seminorm") {
    SpectralState s(8, 1.0);
    CHECK(seminorm(s, 5.0) == 0.0);
    s.coeffs[2] = 0.005;
    CHECK(seminorm(s, 5.0) == doctest::Approx(0.16));
    s.coeffs[3] = 0.001;
    CHECK(seminorm(s, 5.0) == doctest::Approx(0.243));
    s.coeffs[3] = Complex(0.0, -0.002);
    CHECK(seminorm(s, 0.0) == doctest::Approx(0.005));
    CHECK_THROWS_AS(seminorm(s, -1.0), Error);
  }

  TEST_CASE("closure defect") {
    const ClosureDefect unit = closure_defect(SpectralState(8, 1.0));
    CHECK(unit.plus < 1e-12);
    CHECK(unit.minus < 1e-12);

    std::vector<double> k1(256), k2(256);
    for (std::size_t j = 0; j < 256; ++j) {
      const double t = 2 * oracle::kPi * j / 256.0;
      k1[j] = 1.0 / (1.0 + 0.1 * std::cos(t));
      k2[j] = 1.0 / (1.0 + 0.1 * std::cos(2 * t));
    }
    const ClosureDefect d1 = closure_defect(from_samples(k1, 32));
    CHECK(d1.plus == doctest::Approx(0.1 * oracle::kPi).epsilon(1e-12));
    CHECK(d1.minus == doctest::Approx(0.1 * oracle::kPi).epsilon(1e-12));
    const ClosureDefect d2 = closure_defect(from_samples(k2, 32));
    CHECK(d2.plus < 1e-12);

    SpectralState neg(4, 0.1);
    neg.coeffs[2] = 0.2;
    CHECK_THROWS_AS(closure_defect(neg), MonitorBreach);
  }

  TEST_CASE("evolve: constant run and CSV layout") {
    EvolveOptions o;
    o.T = 0.01;
    o.dt = 1e-3;
    o.sample_every = 2;
    o.betas = {3.0};
    const TimeSeries ts = evolve(poly1(), SpectralState(8, 1.0), o);
    CHECK(ts.size() == 6);
    for (double v : ts.khat0) CHECK(v == 1.0);
    CHECK(ts.t.back() == doctest::Approx(0.01));
    CHECK(ts.betas == std::vector<double>{3.0, 5.0});
    std::ostringstream csv;
    ts.write_csv(csv);
    const std::string header = csv.str().substr(0, csv.str().find('\n'));
    CHECK(header ==
          "t,khat0,abs_khat_1,abs_khat_2,abs_khat_3,abs_khat_4,abs_khat_5,abs_khat_6,abs_khat_7,abs_khat_8,seminorm_3,"
          "seminorm_5,closure_plus,closure_minus,area");
    CHECK(ts.area.front() == doctest::Approx(oracle::kPi).epsilon(1e-12));
  }

  TEST_CASE("evolve: stiffness guard and monitors") {
    EvolveOptions o;
    o.T = 0.1;
    o.dt = 0.1;
    CHECK_THROWS_AS(evolve(poly1(), SpectralState(32, 1.0), o), Error);

    SpectralState s(8, 1.0);
    s.coeffs[2] = 0.001;
    EvolveOptions strict;
    strict.T = 0.01;
    strict.dt = 1e-3;
    strict.delta = 1e-6;  // far below the data: the first sample breaches
    strict.strict_monitors = true;
    CHECK_THROWS_AS(evolve(poly1(), s, strict), MonitorBreach);
    strict.strict_monitors = false;
    const TimeSeries ts = evolve(poly1(), s, strict);
    CHECK(ts.trapping_breached);

    SpectralState zero(8, 0.0);
    CHECK_THROWS_AS(step(zero, poly1(), 1e-3), MonitorBreach);
  }

  TEST_CASE("evolution is deterministic") {
    SpectralState s(16, 1.0);
    s.coeffs[2] = 0.003;
    s.coeffs[3] = Complex(0.0, 0.001);
    EvolveOptions o;
    o.T = 0.05;
    const TimeSeries a = evolve(example(), s, o);
    const TimeSeries b = evolve(example(), s, o);
    CHECK(a.final_state.coeffs == b.final_state.coeffs);
  }
}
