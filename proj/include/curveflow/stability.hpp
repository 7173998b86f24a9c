#pragma once

#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "curveflow/flowc.hpp"
#include "curveflow/rational.hpp"
#include "curveflow/spectral.hpp"

namespace curveflow {

namespace detail {

template <class T>
T from_rational(const Rational& r) {
  if constexpr (std::is_same_v<T, Rational>) {
    return r;
  } else {
    return static_cast<T>(to_double(r));
  }
}

}  // namespace detail

/// P_{n,eps} = -lead_mag n^{2p} (1-eps)^M W^M
///           + sum_{(l,j)} (-1)^l n^{2l} a (1 + sgn((-1)^l a) eps)^j W^j.
/// Instantiate with Rational for exact values.
template <class T>
T stability_polynomial(const CompiledFlow& flow, const T& W, const T& eps, int n) {
  const T one(1);
  const T nn = T(n) * T(n);
  T value = -detail::from_rational<T>(flow.lead_mag) * ipow(nn, flow.p) * ipow(T(one - eps), flow.M) * ipow(W, flow.M);
  for (const auto& [key, a] : flow.a_table) {
    const auto [l, j] = key;
    const bool odd = l % 2 == 1;
    const int sgn = ((a > 0) != odd) ? 1 : -1;  // sgn((-1)^l a), a != 0
    const T coeff = odd ? T(-detail::from_rational<T>(a)) : detail::from_rational<T>(a);
    const T bump = sgn > 0 ? T(one + eps) : T(one - eps);
    value += coeff * ipow(nn, l) * ipow(bump, j) * ipow(W, j);
  }
  return value;
}

/// Floating-point P_{n,eps}.
double p_n_eps(const CompiledFlow& flow, double W, double eps, int n);

/// Eigenvalue of the linearisation at k = 1: P_{n,0} with W = 1, exact.
Rational linear_eigenvalue(const CompiledFlow& flow, int n);

/// Upper bound -n^{2p} A + n^{2p-2} B on P_{n,eps} valid for every n >= 1.
struct TailBound {
  unsigned p = 1;
  double A = 0.0;
  double B = 0.0;
  double operator()(int n) const;
};
TailBound tail_bound(const CompiledFlow& flow, double W, double eps);

struct SupResult {
  double c = 0.0;          // max_{2 <= n <= tail_cutoff_n} P_{n,4 delta}
  int argmax_n = 2;
  int tail_cutoff_n = 2;   // P_{n,4 delta} <= tail_value < c for all n > tail_cutoff_n
  double tail_value = 0.0; // tail bound at tail_cutoff_n + 1
  bool stable() const { return c < 0.0; }
};

/// sup over n >= 2 of P_{n,4 delta}. Does not throw on c >= 0; see require_stable.
SupResult sup_p(const CompiledFlow& flow, double W, double delta);

/// Throws CertificationError "not stable at this (W, delta)" when c >= 0.
SupResult require_stable(const CompiledFlow& flow, double W, double delta);

struct DominanceResult {
  bool ok = true;
  /// (n, eps) pairs where P_{2,eps} >= P_{n,eps} could not be established.
  std::vector<std::pair<int, double>> violations;
};

/// Checks P_{2,eps} >= P_{n,eps} for every n >= 3 and eps in [0, 4 delta].
/// The interval is split into `cells` cells; since P_{n,eps} is non-decreasing
/// in eps, P_{2,eps_lo} >= P_{n,eps_hi} settles a whole cell. Cells that fail
/// are bisected up to `refine` times before a violation is reported.
DominanceResult dominance_check(const CompiledFlow& flow, double W, double delta, int cells = 256, int refine = 6);

/// Largest delta in (0, 1/4) for which sup_p < 0 and dominance holds, by
/// bisection to absolute tolerance `tol`. Throws CertificationError
/// "unstable even at delta=0" when the delta = 0 check fails or the flow
/// violates the structure condition.
double max_delta(const CompiledFlow& flow, double W, double tol = 1e-4);

enum class FamilyKind { I, II };

/// Family II: sgn(a_p) = (-1)^p and 3/4 |a_p| >= sum_{j=1}^{p-1} 5/4^{j+1} |a_{p-j}|,
/// exactly. Family I: the sign condition only. `a` holds a_1..a_p.
bool family_criteria(FamilyKind kind, unsigned p, const std::vector<Rational>& a);

struct CertifyOptions {
  double eps_report = 0.05;
  double tol = 1e-4;
  int dominance_cells = 256;
};

struct StabilityCertificate {
  std::string flow_id;
  unsigned p = 0;
  unsigned M = 0;
  double W = 0.0;
  double delta_max = 0.0;
  /// ||psi||_{2p+1} / W, the smallness the data actually has.
  double delta = 0.0;
  double seminorm = 0.0;
  double c = 0.0;
  int argmax_n = 2;
  int tail_cutoff_n = 2;
  double tail_value = 0.0;
  bool dominance_ok = false;
  double eps_report = 0.05;
  double predicted_rate = 0.0;  // P_{2,eps_report}
  double sharp_rate = 0.0;      // P_{2,0}
};

/// Certificate at the operating delta = ||psi||_{2p+1} / psihat(0).
/// Throws CertificationError on a structure violation, on instability, and
/// with "initial data too rough" when ||psi||_{2p+1} > delta_max psihat(0).
StabilityCertificate certify(const CompiledFlow& flow, const SpectralState& psi, const CertifyOptions& options = {});

/// Same checks at an explicit delta (no initial data involved).
StabilityCertificate certify_at(const CompiledFlow& flow, double W, double delta, const CertifyOptions& options = {});

}  // namespace curveflow
