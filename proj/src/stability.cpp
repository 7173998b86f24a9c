#include "curveflow/stability.hpp"

#include <cmath>
#include <sstream>

#include "curveflow/errors.hpp"

namespace curveflow {

namespace {

constexpr int kMaxCutoff = 1 << 20;

void check_delta(double W, double delta) {
  if (!(W > 0.0)) throw Error("W must be positive");
  if (!(delta >= 0.0) || !(4.0 * delta < 1.0)) throw Error("delta must satisfy 0 <= 4 delta < 1");
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

// Smallest cutoff n0 >= start with n0^2 > 2B/A, then extended until the tail
// bound at n0 + 1 falls below `level(n0)`. `level` may grow with n0 (sup_p).
template <class Level>
int tail_cutoff(const TailBound& tail, int start, Level&& level) {
  int n0 = start;
  while (static_cast<double>(n0) * n0 <= 2.0 * tail.B / tail.A) ++n0;
  while (tail(n0 + 1) >= level(n0)) {
    if (++n0 > kMaxCutoff) throw Error("tail cutoff did not converge");
  }
  return n0;
}

}  // namespace

double p_n_eps(const CompiledFlow& flow, double W, double eps, int n) { return stability_polynomial<double>(flow, W, eps, n); }

Rational linear_eigenvalue(const CompiledFlow& flow, int n) {
  return stability_polynomial<Rational>(flow, Rational(1), Rational(0), n);
}

double TailBound::operator()(int n) const {
  const double nn = static_cast<double>(n) * n;
  return std::pow(nn, static_cast<double>(p) - 1.0) * (B - nn * A);
}

TailBound tail_bound(const CompiledFlow& flow, double W, double eps) {
  TailBound t;
  t.p = flow.p;
  t.A = to_double(flow.lead_mag) * ipow(1.0 - eps, flow.M) * ipow(W, flow.M);
  for (const auto& [key, a] : flow.a_table) {
    t.B += std::abs(to_double(a)) * ipow(1.0 + eps, key.second) * ipow(W, key.second);
  }
  return t;
}

SupResult sup_p(const CompiledFlow& flow, double W, double delta) {
  check_delta(W, delta);
  const double eps = 4.0 * delta;
  const TailBound tail = tail_bound(flow, W, eps);
  SupResult r;
  r.c = p_n_eps(flow, W, eps, 2);
  r.argmax_n = 2;
  int scanned = 2;
  auto level = [&](int n0) {
    for (; scanned < n0;) {
      ++scanned;
      const double v = p_n_eps(flow, W, eps, scanned);
      if (v > r.c) {
        r.c = v;
        r.argmax_n = scanned;
      }
    }
    return r.c;
  };
  r.tail_cutoff_n = tail_cutoff(tail, 2, level);
  r.tail_value = tail(r.tail_cutoff_n + 1);
  return r;
}

SupResult require_stable(const CompiledFlow& flow, double W, double delta) {
  SupResult r = sup_p(flow, W, delta);
  if (!r.stable()) {
    throw CertificationError("not stable at this (W, delta) = (" + fmt(W) + ", " + fmt(delta) + "): sup P_{n,4delta} = " +
                             fmt(r.c) + " at n = " + std::to_string(r.argmax_n));
  }
  return r;
}

namespace {

// True when P_{2,lo} >= P_{n,hi} for all n >= 3; records the first failing n.
bool cell_dominated(const CompiledFlow& flow, double W, double lo, double hi, int& failing_n) {
  const double floor2 = p_n_eps(flow, W, lo, 2);
  const TailBound tail = tail_bound(flow, W, hi);
  int n0 = 3;
  while (static_cast<double>(n0) * n0 <= 2.0 * tail.B / tail.A) ++n0;
  while (tail(n0 + 1) >= floor2) {
    if (++n0 > kMaxCutoff) break;
  }
  for (int n = 3; n <= n0; ++n) {
    if (p_n_eps(flow, W, hi, n) > floor2) {
      failing_n = n;
      return false;
    }
  }
  if (tail(n0 + 1) >= floor2) {
    failing_n = n0 + 1;
    return false;
  }
  return true;
}

bool settle(const CompiledFlow& flow, double W, double lo, double hi, int depth, int& failing_n, double& failing_eps) {
  if (cell_dominated(flow, W, lo, hi, failing_n)) return true;
  if (depth == 0) {
    failing_eps = hi;
    return false;
  }
  const double mid = 0.5 * (lo + hi);
  return settle(flow, W, lo, mid, depth - 1, failing_n, failing_eps) &&
         settle(flow, W, mid, hi, depth - 1, failing_n, failing_eps);
}

}  // namespace

DominanceResult dominance_check(const CompiledFlow& flow, double W, double delta, int cells, int refine) {
  check_delta(W, delta);
  if (cells < 1) throw Error("dominance check needs at least one cell");
  DominanceResult result;
  if (delta == 0.0) return result;
  const double width = 4.0 * delta;
  for (int i = 0; i < cells; ++i) {
    const double lo = width * i / cells;
    const double hi = width * (i + 1) / cells;
    int n = 0;
    double eps = hi;
    if (!settle(flow, W, lo, hi, refine, n, eps)) {
      result.ok = false;
      result.violations.emplace_back(n, eps);
    }
  }
  return result;
}

double max_delta(const CompiledFlow& flow, double W, double tol) {
  if (!(tol > 0.0)) throw Error("tolerance must be positive");
  if (!flow.structure_ok) {
    std::string why;
    for (const auto& v : flow.violations) why += (why.empty() ? "" : "; ") + v;
    throw CertificationError("unstable even at delta=0: structure condition fails (" + why + ")");
  }
  const SupResult at_zero = sup_p(flow, W, 0.0);
  if (!at_zero.stable()) {
    throw CertificationError("unstable even at delta=0: P_{" + std::to_string(at_zero.argmax_n) + ",0} = " + fmt(at_zero.c));
  }
  auto ok = [&](double d) { return sup_p(flow, W, d).stable() && dominance_check(flow, W, d).ok; };
  double lo = 0.0;
  double hi = 0.25;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

bool family_criteria(FamilyKind kind, unsigned p, const std::vector<Rational>& a) {
  if (p < 1 || a.size() != p) throw Error("family criteria need p >= 1 and exactly p coefficients");
  const Rational& ap = a[p - 1];
  const bool sign_ok = p % 2 == 0 ? ap > 0 : ap < 0;
  if (kind == FamilyKind::I || !sign_ok) return sign_ok;
  Rational rhs = 0;
  Rational weight(5, 16);  // 5 / 4^{j+1} at j = 1
  for (unsigned j = 1; j + 1 <= p; ++j) {
    rhs += weight * abs(a[p - j - 1]);
    weight /= 4;
  }
  return Rational(3, 4) * abs(ap) >= rhs;
}

namespace {

StabilityCertificate assemble(const CompiledFlow& flow, double W, double delta, double delta_max,
                              const CertifyOptions& options) {
  const SupResult sup = require_stable(flow, W, delta);
  const DominanceResult dom = dominance_check(flow, W, delta, options.dominance_cells);
  StabilityCertificate cert;
  cert.flow_id = flow.name;
  cert.p = flow.p;
  cert.M = flow.M;
  cert.W = W;
  cert.delta_max = delta_max;
  cert.delta = delta;
  cert.seminorm = delta * W;
  cert.c = sup.c;
  cert.argmax_n = sup.argmax_n;
  cert.tail_cutoff_n = sup.tail_cutoff_n;
  cert.tail_value = sup.tail_value;
  cert.dominance_ok = dom.ok;
  cert.eps_report = options.eps_report;
  cert.predicted_rate = p_n_eps(flow, W, options.eps_report, 2);
  cert.sharp_rate = p_n_eps(flow, W, 0.0, 2);
  if (!(cert.predicted_rate < 0.0)) {
    throw CertificationError("predicted rate P_{2," + fmt(options.eps_report) + "} = " + fmt(cert.predicted_rate) +
                             " is not negative; lower the reporting eps");
  }
  return cert;
}

}  // namespace

StabilityCertificate certify_at(const CompiledFlow& flow, double W, double delta, const CertifyOptions& options) {
  if (!(options.eps_report >= 0.0 && options.eps_report < 1.0)) throw Error("reporting eps must lie in [0, 1)");
  const double dmax = max_delta(flow, W, options.tol);
  return assemble(flow, W, delta, dmax, options);
}

StabilityCertificate certify(const CompiledFlow& flow, const SpectralState& psi, const CertifyOptions& options) {
  const double W = psi.average();
  if (!(W > 0.0)) throw CertificationError("initial average curvature must be positive");
  if (!(options.eps_report >= 0.0 && options.eps_report < 1.0)) throw Error("reporting eps must lie in [0, 1)");
  const double dmax = max_delta(flow, W, options.tol);
  const double norm = seminorm(psi, 2.0 * flow.p + 1.0);
  if (norm > dmax * W) {
    throw CertificationError("initial data too rough: ||psi||_" + std::to_string(2 * flow.p + 1) + " = " + fmt(norm) +
                             " exceeds delta_max * W = " + fmt(dmax * W));
  }
  StabilityCertificate cert = assemble(flow, W, norm / W, dmax, options);
  cert.seminorm = norm;
  return cert;
}

}  // namespace curveflow
