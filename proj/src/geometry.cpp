#include "curveflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "curveflow/errors.hpp"
#include "fft.hpp"

namespace curveflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t geometry_grid(int N, std::size_t requested) {
  const std::size_t floor = std::max<std::size_t>(16 * static_cast<std::size_t>(N), 64);
  return efficient_size(requested ? std::max(requested, 2 * static_cast<std::size_t>(N) + 1) : floor);
}

// Periodic part of the antiderivative of f (zero at theta = 0) plus the mean of f.
struct Antiderivative {
  std::vector<double> periodic;
  double mean = 0.0;
};

Antiderivative integrate(detail::RealTransform& fft, const std::vector<double>& f) {
  const std::size_t G = f.size();
  const std::size_t K = (G - 1) / 2;
  std::vector<Complex> c(K + 1);
  fft.forward(f, c);
  Antiderivative out;
  out.mean = c[0].real();
  c[0] = 0.0;
  for (std::size_t m = 1; m <= K; ++m) c[m] /= Complex(0.0, static_cast<double>(m));
  out.periodic.resize(G);
  fft.inverse(c, out.periodic);
  const double base = out.periodic[0];
  for (double& v : out.periodic) v -= base;
  return out;
}

}  // namespace

SpectralState make_initial(double W, const ModeMap& modes, bool enforce_closure, int N) {
  if (!(W > 0.0)) throw Error("W must be positive");
  for (const auto& [n, a] : modes) {
    if (n < 1) throw Error("perturbation modes must have n >= 1");
    if (n > N) throw Error("mode " + std::to_string(n) + " exceeds the truncation N = " + std::to_string(N));
    if (enforce_closure && n == 1) throw Error("mode ±1 forbidden under closure enforcement");
  }
  if (!enforce_closure) {
    SpectralState s(N, W);
    for (const auto& [n, a] : modes) s.coeffs[static_cast<std::size_t>(n)] += 0.5 * a;
    const std::vector<double> k = to_samples(s, geometry_grid(N, 0));
    if (*std::min_element(k.begin(), k.end()) <= 0.0) throw Error("perturbation too large: curvature is not positive");
    return s;
  }

  // rho = 1/W - (1/W^2) sum Re(a_n e^{i n theta}) so that k = 1/rho = W + sum Re(...) to first order
  SpectralState rho(N, 1.0 / W);
  for (const auto& [n, a] : modes) rho.coeffs[static_cast<std::size_t>(n)] -= 0.5 * a / (W * W);
  const std::vector<double> r = to_samples(rho, geometry_grid(N, 0));
  std::vector<double> k(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (r[j] <= 0.0) throw Error("perturbation too large: radius of curvature is not positive");
    k[j] = 1.0 / r[j];
  }
  return from_samples(k, N);
}

CurvePoints reconstruct(const SpectralState& state, std::size_t samples) {
  const std::size_t G = geometry_grid(state.N, samples);
  const std::vector<double> k = to_samples(state, G);
  std::vector<double> dx(G);
  std::vector<double> dy(G);
  CurvePoints out;
  out.theta.resize(G);
  for (std::size_t j = 0; j < G; ++j) {
    if (!(k[j] > 0.0)) throw MonitorBreach("curvature lost positivity");
    const double theta = kTwoPi * static_cast<double>(j) / static_cast<double>(G);
    out.theta[j] = theta;
    dx[j] = std::cos(theta) / k[j];
    dy[j] = std::sin(theta) / k[j];
    out.perimeter += 1.0 / k[j];
  }
  out.perimeter *= kTwoPi / static_cast<double>(G);

  detail::RealTransform fft(G);
  const Antiderivative ix = integrate(fft, dx);
  const Antiderivative iy = integrate(fft, dy);
  out.x.resize(G);
  out.y.resize(G);
  for (std::size_t j = 0; j < G; ++j) {
    out.x[j] = ix.mean * out.theta[j] + ix.periodic[j];
    out.y[j] = iy.mean * out.theta[j] + iy.periodic[j];
  }
  out.closure_gap = kTwoPi * std::hypot(ix.mean, iy.mean);
  return out;
}

double enclosed_area(const SpectralState& state) {
  const CurvePoints c = reconstruct(state);
  const std::size_t G = c.theta.size();
  const std::vector<double> k = to_samples(state, G);
  double sum = 0.0;
  for (std::size_t j = 0; j < G; ++j) {
    const double rho = 1.0 / k[j];
    sum += c.x[j] * std::sin(c.theta[j]) * rho - c.y[j] * std::cos(c.theta[j]) * rho;
  }
  return 0.5 * sum * kTwoPi / static_cast<double>(G);
}

SpectralState normalize_area(const SpectralState& state, double target) {
  if (!(target > 0.0)) throw Error("target area must be positive");
  const double A = enclosed_area(state);
  if (!(A > 0.0)) throw Error("enclosed area is not positive");
  SpectralState out = state;
  const double scale = std::sqrt(A / target);
  for (Complex& c : out.coeffs) c *= scale;
  return out;
}

}  // namespace curveflow
