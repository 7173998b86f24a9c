#include "curveflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "curveflow/errors.hpp"
#include "curveflow/geometry.hpp"
#include "fft.hpp"

namespace curveflow {

namespace {

constexpr Complex kI{0.0, 1.0};

Complex i_power(int n, unsigned order) {
  // (i n)^order
  return ipow(Complex(0.0, static_cast<double>(n)), order);
}

void require_grid(std::size_t grid, int N) {
  if (grid < static_cast<std::size_t>(2 * N + 1)) {
    throw Error("grid of " + std::to_string(grid) + " points cannot resolve " + std::to_string(N) + " modes");
  }
}

}  // namespace

SpectralState::SpectralState(int truncation, double average) : N(truncation), coeffs(static_cast<std::size_t>(truncation) + 1) {
  if (truncation < 1) throw Error("truncation radius must be positive");
  coeffs[0] = average;
}

Complex SpectralState::operator[](int n) const {
  if (n < -N || n > N) return {};
  return n >= 0 ? coeffs[static_cast<std::size_t>(n)] : std::conj(coeffs[static_cast<std::size_t>(-n)]);
}

std::size_t efficient_size(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 2);; ++m) {
    std::size_t r = m;
    for (std::size_t f : {2, 3, 5}) {
      while (r % f == 0) r /= f;
    }
    if (r == 1) return m;
  }
}

std::vector<double> to_samples(const SpectralState& state, std::size_t grid_size) {
  require_grid(grid_size, state.N);
  detail::RealTransform fft(grid_size);
  std::vector<double> out(grid_size);
  fft.inverse(state.coeffs, out);
  return out;
}

SpectralState from_samples(std::span<const double> values, int N) {
  require_grid(values.size(), N);
  detail::RealTransform fft(values.size());
  SpectralState s(N);
  fft.forward(values, s.coeffs);
  s.coeffs[0] = s.coeffs[0].real();
  return s;
}

std::vector<double> derivative_samples(const SpectralState& state, unsigned order, std::size_t grid_size) {
  require_grid(grid_size, state.N);
  std::vector<Complex> c(state.coeffs.size());
  for (int n = 0; n <= state.N; ++n) c[static_cast<std::size_t>(n)] = i_power(n, order) * state.coeffs[static_cast<std::size_t>(n)];
  if (order == 0) c[0] = state.coeffs[0];
  detail::RealTransform fft(grid_size);
  std::vector<double> out(grid_size);
  fft.inverse(c, out);
  return out;
}

double diagonal_rate(const CompiledFlow& flow, double khat0, int n) {
  if (n == 0) return 0.0;
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  double rate = -to_double(flow.lead_mag) * ipow(nn, flow.p) * ipow(khat0, flow.M);
  for (const auto& [key, a] : flow.a_table) {
    const auto [l, j] = key;
    const double sign = (l % 2 == 0) ? 1.0 : -1.0;
    rate += sign * ipow(nn, l) * to_double(a) * ipow(khat0, j);
  }
  return rate;
}

std::vector<Complex> RhsSplit::total() const {
  std::vector<Complex> out(diagonal.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = diagonal[n] + off_diagonal[n];
  return out;
}

RhsSplit rhs_direct(const SpectralState& state, const CompiledFlow& flow, int max_modes) {
  const int N = state.N;
  if (N > max_modes) {
    throw Error("direct convolution is limited to N <= " + std::to_string(max_modes) + " (got " + std::to_string(N) + ")");
  }
  const std::size_t width = static_cast<std::size_t>(2 * N + 1);

  // factor sequences (i q)^j khat(q), q = -N..N, indexed by q + N
  std::vector<std::vector<Complex>> factor(flow.pde.jet_length());
  for (std::size_t j = 0; j < factor.size(); ++j) {
    factor[j].resize(width);
    for (int q = -N; q <= N; ++q) {
      Complex c = state[q];
      factor[j][static_cast<std::size_t>(q + N)] = j == 0 ? c : i_power(q, static_cast<unsigned>(j)) * c;
    }
  }

  std::vector<Complex> total(static_cast<std::size_t>(N) + 1);
  for (const auto& term : flow.pde.terms()) {
    // product sequence, support [-offset, offset]
    std::vector<Complex> acc{Complex(1.0)};
    int offset = 0;
    for (std::size_t j = 0; j < term.exps.size(); ++j) {
      for (unsigned r = 0; r < term.exps[j]; ++r) {
        std::vector<Complex> next(acc.size() + width - 1);
        for (std::size_t a = 0; a < acc.size(); ++a) {
          if (acc[a] == Complex{}) continue;
          for (std::size_t b = 0; b < width; ++b) next[a + b] += acc[a] * factor[j][b];
        }
        acc = std::move(next);
        offset += N;
      }
    }
    const double c = to_double(term.coeff);
    for (int n = 0; n <= N; ++n) {
      const int idx = n + offset;
      if (idx >= 0 && idx < static_cast<int>(acc.size())) total[static_cast<std::size_t>(n)] += c * acc[static_cast<std::size_t>(idx)];
    }
  }

  RhsSplit split;
  split.diagonal.resize(total.size());
  split.off_diagonal.resize(total.size());
  const double k0 = state.average();
  for (int n = 0; n <= N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    split.diagonal[i] = diagonal_rate(flow, k0, n) * state.coeffs[i];
    split.off_diagonal[i] = total[i] - split.diagonal[i];
  }
  return split;
}

struct RhsEvaluator::Impl {
  Impl(const CompiledFlow& flow, int truncation)
      : poly(flow.pde),
        N(truncation),
        orders(flow.pde.jet_length()),
        grid(efficient_size(std::max<std::size_t>(static_cast<std::size_t>(flow.pde.max_total_degree() + 1) * static_cast<std::size_t>(N) + 1,
                                                  static_cast<std::size_t>(2 * N + 1)))),
        fft(grid),
        samples(orders, std::vector<double>(grid)),
        values(grid),
        scratch(static_cast<std::size_t>(N) + 1) {}

  CompiledPoly poly;
  int N;
  std::size_t orders;
  std::size_t grid;
  detail::RealTransform fft;
  std::vector<std::vector<double>> samples;
  std::vector<double> values;
  std::vector<Complex> scratch;
};

RhsEvaluator::RhsEvaluator(const CompiledFlow& flow, int N) : impl_(new Impl(flow, N)) {}

RhsEvaluator::~RhsEvaluator() { delete impl_; }

std::size_t RhsEvaluator::grid_size() const noexcept { return impl_->grid; }

void RhsEvaluator::evaluate(const SpectralState& state, std::vector<Complex>& out) {
  Impl& m = *impl_;
  if (state.N != m.N) throw Error("state truncation does not match evaluator");
  for (std::size_t j = 0; j < m.orders; ++j) {
    for (int n = 0; n <= m.N; ++n) {
      const auto i = static_cast<std::size_t>(n);
      m.scratch[i] = j == 0 ? state.coeffs[i] : i_power(n, static_cast<unsigned>(j)) * state.coeffs[i];
    }
    m.fft.inverse(m.scratch, m.samples[j]);
  }
  std::vector<double> jet(std::max<std::size_t>(m.orders, 1));
  for (std::size_t g = 0; g < m.grid; ++g) {
    for (std::size_t j = 0; j < m.orders; ++j) jet[j] = m.samples[j][g];
    m.values[g] = m.poly(jet.data());
  }
  out.resize(static_cast<std::size_t>(m.N) + 1);
  m.fft.forward(m.values, out);
  out[0] = out[0].real();
}

std::vector<Complex> rhs_pseudospectral(const SpectralState& state, const CompiledFlow& flow) {
  RhsEvaluator eval(flow, state.N);
  std::vector<Complex> out;
  eval.evaluate(state, out);
  return out;
}

double phi1(double z) {
  if (std::abs(z) < 1e-4) {
    return 1.0 + z * (1.0 / 2 + z * (1.0 / 6 + z * (1.0 / 24 + z * (1.0 / 120 + z / 720))));
  }
  return std::expm1(z) / z;
}

SpectralState exponential_euler(const SpectralState& state, const CompiledFlow& flow, std::span<const Complex> rhs,
                                double dt) {
  if (!(dt > 0.0)) throw Error("time step must be positive");
  if (!rhs.empty() && rhs.size() != state.coeffs.size()) throw Error("right-hand side has the wrong length");
  SpectralState next = state;
  next.time = state.time + dt;
  const double k0 = state.average();
  for (int n = 0; n <= state.N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const double L = diagonal_rate(flow, k0, n);
    const Complex remainder = rhs.empty() ? Complex{} : rhs[i] - L * state.coeffs[i];
    next.coeffs[i] = std::exp(L * dt) * state.coeffs[i] + phi1(L * dt) * dt * remainder;
  }
  next.coeffs[0] = next.coeffs[0].real();
  return next;
}

namespace {

SpectralState step_with(RhsEvaluator& eval, std::vector<Complex>& rhs, const SpectralState& state, const CompiledFlow& flow,
                        double dt) {
  if (!(state.average() > 0.0)) throw MonitorBreach("curvature average lost positivity");
  eval.evaluate(state, rhs);
  SpectralState next = exponential_euler(state, flow, rhs, dt);
  if (!(next.average() > 0.0)) throw MonitorBreach("curvature average lost positivity");
  return next;
}

}  // namespace

SpectralState step(const SpectralState& state, const CompiledFlow& flow, double dt) {
  RhsEvaluator eval(flow, state.N);
  std::vector<Complex> rhs;
  return step_with(eval, rhs, state, flow, dt);
}

double seminorm(const SpectralState& state, double beta) {
  if (beta < 0.0) throw Error("seminorm exponent must be non-negative");
  double best = 0.0;
  for (int n = 1; n <= state.N; ++n) {
    const Complex c = state.coeffs[static_cast<std::size_t>(n)];
    best = std::max(best, std::pow(static_cast<double>(n), beta) * std::max(std::abs(c.real()), std::abs(c.imag())));
  }
  return best;
}

ClosureDefect closure_defect(const SpectralState& state, std::size_t grid_size) {
  const std::size_t grid = grid_size ? grid_size : efficient_size(std::max<std::size_t>(8 * static_cast<std::size_t>(state.N), 64));
  const std::vector<double> k = to_samples(state, grid);
  Complex plus{};
  Complex minus{};
  const double h = 2.0 * std::numbers::pi / static_cast<double>(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    if (!(k[j] > 0.0)) throw MonitorBreach("curvature lost positivity");
    const double theta = h * static_cast<double>(j);
    plus += std::exp(kI * theta) / k[j];
    minus += std::exp(-kI * theta) / k[j];
  }
  return {std::abs(plus * h), std::abs(minus * h)};
}

std::vector<double> TimeSeries::mode_series(int n) const {
  if (n < 1 || n > N) throw Error("mode " + std::to_string(n) + " outside 1.." + std::to_string(N));
  std::vector<double> out;
  out.reserve(abs_modes.size());
  for (const auto& row : abs_modes) out.push_back(row[static_cast<std::size_t>(n - 1)]);
  return out;
}

namespace {

std::string beta_label(double beta) {
  std::ostringstream out;
  out << beta;
  return out.str();
}

}  // namespace

std::string TimeSeries::csv_header() const {
  std::string h = "t,khat0";
  for (int n = 1; n <= N; ++n) h += ",abs_khat_" + std::to_string(n);
  for (double b : betas) h += ",seminorm_" + beta_label(b);
  h += ",closure_plus,closure_minus,area";
  return h;
}

void TimeSeries::write_csv(std::ostream& out) const {
  out << csv_header() << "\n";
  out << std::setprecision(17);
  for (std::size_t s = 0; s < t.size(); ++s) {
    out << t[s] << "," << khat0[s];
    for (double v : abs_modes[s]) out << "," << v;
    for (double v : seminorms[s]) out << "," << v;
    out << "," << closure_plus[s] << "," << closure_minus[s] << "," << (s < area.size() ? area[s] : 0.0) << "\n";
  }
}

TimeSeries evolve(const CompiledFlow& flow, const SpectralState& initial, const EvolveOptions& options) {
  if (!(options.dt > 0.0) || !(options.T > 0.0)) throw Error("T and dt must be positive");
  if (options.sample_every < 1) throw Error("sample_every must be at least 1");
  const double k0 = initial.average();
  if (!(k0 > 0.0)) throw MonitorBreach("curvature average lost positivity");

  double stiffest = 0.0;
  for (int n = 0; n <= initial.N; ++n) stiffest = std::max(stiffest, std::abs(diagonal_rate(flow, k0, n)));
  if (stiffest * options.dt > options.stiffness_guard) {
    std::ostringstream msg;
    msg << "time step " << options.dt << " rejected: max |P_n| dt = " << stiffest * options.dt << " exceeds guard "
        << options.stiffness_guard;
    throw Error(msg.str());
  }

  const double trap_beta = 2.0 * flow.p + 1.0;
  TimeSeries ts;
  ts.N = initial.N;
  ts.betas = options.betas;
  if (std::find(ts.betas.begin(), ts.betas.end(), trap_beta) == ts.betas.end()) ts.betas.push_back(trap_beta);
  ts.delta = options.delta >= 0.0 ? options.delta : seminorm(initial, trap_beta) / k0;
  ts.trapping_threshold = 2.0 * ts.delta * k0;
  ts.window_low = (1.0 - 4.0 * ts.delta) * k0;
  ts.window_high = (1.0 + 4.0 * ts.delta) * k0;
  ts.initial = initial;

  auto check_monitors = [&](const SpectralState& s) {
    const double trap = seminorm(s, trap_beta);
    std::string breach;
    if (trap > ts.trapping_threshold) {
      ts.trapping_breached = true;
      breach = "trapping region left at t = " + std::to_string(s.time);
    }
    const double avg = s.average();
    if (avg < ts.window_low || avg > ts.window_high) {
      ts.window_breached = true;
      if (breach.empty()) breach = "average curvature left its window at t = " + std::to_string(s.time);
    }
    if (!breach.empty() && options.strict_monitors) {
      ts.terminated_early = true;
      ts.termination_reason = breach;
      throw MonitorBreach(breach);
    }
  };

  auto observe = [&](const SpectralState& s) {
    ts.t.push_back(s.time);
    ts.khat0.push_back(s.average());
    std::vector<double> mags(static_cast<std::size_t>(s.N));
    for (int n = 1; n <= s.N; ++n) mags[static_cast<std::size_t>(n - 1)] = std::abs(s.coeffs[static_cast<std::size_t>(n)]);
    ts.abs_modes.push_back(std::move(mags));
    std::vector<double> norms;
    for (double b : ts.betas) norms.push_back(seminorm(s, b));
    ts.seminorms.push_back(std::move(norms));
    ts.trapping.push_back(seminorm(s, trap_beta));
    const ClosureDefect cd = closure_defect(s);
    ts.closure_plus.push_back(cd.plus);
    ts.closure_minus.push_back(cd.minus);
    if (options.record_area) ts.area.push_back(enclosed_area(s));
  };

  RhsEvaluator eval(flow, initial.N);
  std::vector<Complex> rhs;
  SpectralState state = initial;
  observe(state);
  check_monitors(state);

  const auto steps = static_cast<long>(std::ceil(options.T / options.dt - 1e-9));
  for (long s = 1; s <= steps; ++s) {
    const double target = std::min(options.T, static_cast<double>(s) * options.dt);
    state = step_with(eval, rhs, state, flow, target - state.time);
    state.time = target;
    const bool last = s == steps;
    check_monitors(state);
    if (s % options.sample_every == 0 || last) observe(state);
  }
  ts.final_state = state;
  return ts;
}

}  // namespace curveflow
