#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "curveflow/flowc.hpp"

namespace curveflow {

using Complex = std::complex<double>;

/// Truncated Fourier series k(theta) = sum_{|n| <= N} khat(n) e^{i n theta}.
/// Only n = 0..N is stored; khat(-n) = conj(khat(n)) is implied.
struct SpectralState {
  int N = 0;
  std::vector<Complex> coeffs;  // size N + 1
  double time = 0.0;

  SpectralState() = default;
  explicit SpectralState(int truncation, double average = 0.0);

  Complex operator[](int n) const;  // any n in [-N, N]
  double average() const { return coeffs.empty() ? 0.0 : coeffs[0].real(); }
};

/// Smallest 2^a 3^b 5^c at or above n.
std::size_t efficient_size(std::size_t n);

/// k at theta_j = 2 pi j / grid_size. Throws if grid_size < 2N + 1.
std::vector<double> to_samples(const SpectralState& state, std::size_t grid_size);

/// Forward transform of uniform samples, truncated to modes 0..N.
/// Throws if values.size() < 2N + 1.
SpectralState from_samples(std::span<const double> values, int N);

/// Samples of the j-th theta derivative of k.
std::vector<double> derivative_samples(const SpectralState& state, unsigned order, std::size_t grid_size);

/// Diagonal growth rate of mode n with the current average frozen:
/// -lead_mag n^{2p} khat0^M + sum (-1)^l n^{2l} a_{j_l} khat0^{j_l}; zero at n = 0.
double diagonal_rate(const CompiledFlow& flow, double khat0, int n);

/// Right-hand side split into the diagonal part P_n khat(n) and the rest.
struct RhsSplit {
  std::vector<Complex> diagonal;
  std::vector<Complex> off_diagonal;

  std::vector<Complex> total() const;
};

/// Galerkin-truncated right-hand side by direct convolution in coefficient
/// space; the reference the fast path is checked against.
/// Throws when N exceeds `max_modes`.
RhsSplit rhs_direct(const SpectralState& state, const CompiledFlow& flow, int max_modes = 8);

/// Same system evaluated on a dealiased physical grid (grid >= D N + 1 where D
/// is the largest total degree in the PDE).
std::vector<Complex> rhs_pseudospectral(const SpectralState& state, const CompiledFlow& flow);

/// Reusable transform plans and scratch buffers for one flow and truncation.
/// Not thread-safe; use one per evolution.
class RhsEvaluator {
 public:
  RhsEvaluator(const CompiledFlow& flow, int N);
  ~RhsEvaluator();
  RhsEvaluator(const RhsEvaluator&) = delete;
  RhsEvaluator& operator=(const RhsEvaluator&) = delete;

  std::size_t grid_size() const noexcept;
  void evaluate(const SpectralState& state, std::vector<Complex>& out);

 private:
  struct Impl;
  Impl* impl_;
};

/// phi_1(z) = (e^z - 1) / z with a Taylor branch for |z| < 1e-4.
double phi1(double z);

/// One exponential Euler update khat(n) <- e^{L dt} khat(n) + phi1(L dt) dt R_n
/// with R_n = rhs_n - L_n khat(n). `rhs` is the full right-hand side; pass an
/// empty span to treat the remainder as zero.
SpectralState exponential_euler(const SpectralState& state, const CompiledFlow& flow, std::span<const Complex> rhs,
                                double dt);

/// rhs_pseudospectral followed by exponential_euler; throws MonitorBreach if
/// the average curvature is not positive afterwards.
SpectralState step(const SpectralState& state, const CompiledFlow& flow, double dt);

/// max_{1 <= n <= N} n^beta max(|Re khat(n)|, |Im khat(n)|).
double seminorm(const SpectralState& state, double beta);

/// Closure integrals |U_+|, |U_-| of e^{+-i theta} / k by the trapezoidal rule.
struct ClosureDefect {
  double plus = 0.0;
  double minus = 0.0;
};

/// Uses max(8N, 64) points unless grid_size is given. Throws MonitorBreach
/// on a non-positive sample.
ClosureDefect closure_defect(const SpectralState& state, std::size_t grid_size = 0);

struct EvolveOptions {
  double T = 0.5;
  double dt = 1e-3;
  int sample_every = 10;
  std::vector<double> betas;
  /// Smallness of the initial data; the trapping region is ||k||_{2p+1} <= 2 delta khat0(0)
  /// and the average window is (1 +- 4 delta) khat0(0). Negative: derive it from the
  /// initial state as ||psi||_{2p+1} / psihat(0).
  double delta = -1.0;
  bool strict_monitors = false;
  /// Rejects dt when max_n |P_n| dt exceeds this.
  double stiffness_guard = 2000.0;
  bool record_area = true;
};

struct TimeSeries {
  int N = 0;
  std::vector<double> betas;
  std::vector<double> t;
  std::vector<double> khat0;
  std::vector<std::vector<double>> abs_modes;   // [sample][n-1]
  std::vector<std::vector<double>> seminorms;   // [sample][beta index]
  std::vector<double> trapping;                 // ||k||_{2p+1}
  std::vector<double> closure_plus;
  std::vector<double> closure_minus;
  std::vector<double> area;

  double delta = 0.0;
  double trapping_threshold = 0.0;
  double window_low = 0.0;
  double window_high = 0.0;
  bool trapping_breached = false;
  bool window_breached = false;
  bool terminated_early = false;
  std::string termination_reason;

  SpectralState initial;
  SpectralState final_state;

  std::size_t size() const noexcept { return t.size(); }
  /// Column |khat(n)| over time.
  std::vector<double> mode_series(int n) const;
  std::string csv_header() const;
  void write_csv(std::ostream& out) const;
};

/// Fixed-step evolution with periodic observation. Monitor breaches stop the
/// run and throw MonitorBreach in strict mode; otherwise they are recorded.
TimeSeries evolve(const CompiledFlow& flow, const SpectralState& initial, const EvolveOptions& options);

}  // namespace curveflow
