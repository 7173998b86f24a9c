#include "curveflow/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "curveflow/errors.hpp"

namespace curveflow {

RateFit fit_rate(std::span<const double> t, std::span<const double> y, double window) {
  if (t.size() != y.size()) throw Error("time and value series differ in length");
  if (!(window > 0.0 && window <= 1.0)) throw Error("fit window must lie in (0, 1]");
  if (t.empty()) throw Error("too few samples in fit window (0 < 8)");
  const double start = t.back() - window * (t.back() - t.front()) - 1e-12 * std::abs(t.back());
  double st = 0.0, sy = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < start) continue;
    if (!(y[i] > 0.0)) throw Error("series not positive at t = " + std::to_string(t[i]));
    st += t[i];
    sy += std::log(y[i]);
    ++count;
  }
  if (count < 8) throw Error("too few samples in fit window (" + std::to_string(count) + " < 8)");
  const double mt = st / static_cast<double>(count);
  const double my = sy / static_cast<double>(count);
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < start) continue;
    const double dt = t[i] - mt;
    const double dy = std::log(y[i]) - my;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  if (stt == 0.0) throw Error("fit window has no time spread");
  RateFit fit;
  fit.samples = count;
  fit.rate = sty / stt;
  const double residual = syy - fit.rate * sty;
  // a flat series leaves only rounding noise in syy
  const double flat = 1e-24 * static_cast<double>(count) * (1.0 + my * my);
  fit.r2 = syy > flat ? std::clamp(1.0 - residual / syy, 0.0, 1.0) : 1.0;
  return fit;
}

FlowExpr resolve_flow(const std::string& text) {
  constexpr std::string_view prefix = "builtin:";
  if (text.rfind(prefix, 0) == 0) return builtin_flow_from_spec(std::string_view(text).substr(prefix.size()));
  return parse_flow(text);
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("invalid config: ") + what);
  };
  need(W > 0.0, "W must be positive");
  need(N >= 4, "N must be at least 4");
  need(dt > 0.0, "dt must be positive");
  need(T > 0.0, "T must be positive");
  need(dt <= T, "dt must not exceed T");
  need(sample_every >= 1, "sample_every must be at least 1");
  need(eps_report >= 0.0 && eps_report < 1.0, "eps_report must lie in [0, 1)");
  need(tol > 0.0, "tol must be positive");
  need(fit_window > 0.0 && fit_window <= 1.0, "fit_window must lie in (0, 1]");
  need(fit_mode >= 1 && fit_mode <= N, "fit_mode must lie in 1..N");
  need(rate_tol > 0.0, "rate_tol must be positive");
  need(closure_tol > 0.0, "closure_tol must be positive");
  for (double b : betas) need(b >= 0.0, "betas must be non-negative");
}

bool ExperimentReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

bool ExperimentReport::monitor_failed() const {
  return std::any_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.monitor && !v.passed; });
}

const ModeRate* ExperimentReport::mode(int n) const {
  for (const auto& m : mode_rates) {
    if (m.n == n) return &m;
  }
  return nullptr;
}

namespace {

template <class Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  const std::string tag = std::string(stage) + ": ";
  try {
    return fn();
  } catch (const CertificationError& e) {
    throw CertificationError(tag + e.what());
  } catch (const MonitorBreach& e) {
    throw MonitorBreach(tag + e.what());
  } catch (const ClassificationError& e) {
    throw ClassificationError(tag + e.what());
  } catch (const Error& e) {
    throw Error(tag + e.what());
  }
}

std::string num(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.config = config;

  report.flow = staged("compile", [&] { return compile_flow(resolve_flow(config.flow), config.flip_sign); });
  report.flow_id = report.flow.name;
  if (!report.flow.structure_ok) {
    std::string why;
    for (const auto& v : report.flow.violations) why += (why.empty() ? "" : "; ") + v;
    throw CertificationError("compile: structure condition fails: " + why);
  }

  SpectralState initial = staged("initial", [&] {
    SpectralState s = make_initial(config.W, config.modes, config.enforce_closure, config.N);
    return config.normalize_area ? normalize_area(s) : s;
  });
  report.initial_area = staged("initial", [&] { return enclosed_area(initial); });

  CertifyOptions copts;
  copts.eps_report = config.eps_report;
  copts.tol = config.tol;
  try {
    report.certificate = staged("certify", [&] { return certify(report.flow, initial, copts); });
    report.certified = true;
  } catch (const CertificationError& e) {
    if (!config.force) throw;
    report.refusal = e.what();
  }

  EvolveOptions eopts;
  eopts.T = config.T;
  eopts.dt = config.dt;
  eopts.sample_every = config.sample_every;
  eopts.betas = config.betas;
  eopts.strict_monitors = config.strict_monitors;
  report.series = staged("evolve", [&] { return evolve(report.flow, initial, eopts); });
  const TimeSeries& ts = report.series;

  for (int n = 1; n <= std::min(config.N, 8); ++n) {
    ModeRate m;
    m.n = n;
    try {
      m.fit = fit_rate(ts.t, ts.mode_series(n), config.fit_window);
      m.fitted = true;
    } catch (const Error& e) {
      m.note = e.what();
    }
    report.mode_rates.push_back(std::move(m));
  }

  report.khat0_T = ts.khat0.back();
  const double t_start = ts.t.back() - config.fit_window * (ts.t.back() - ts.t.front());
  double lo = report.khat0_T, hi = report.khat0_T;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts.t[i] < t_start) continue;
    lo = std::min(lo, ts.khat0[i]);
    hi = std::max(hi, ts.khat0[i]);
  }
  report.khat0_drift = hi - lo;
  report.sharp_rate = p_n_eps(report.flow, report.khat0_T, 0.0, 2);
  report.predicted_rate = p_n_eps(report.flow, report.khat0_T, config.eps_report, 2);

  const ModeRate* fm = report.mode(config.fit_mode);
  Verdict match{"rate_match", false, "", false};
  Verdict bound{"rate_bound", false, "", false};
  if (fm == nullptr || !fm->fitted) {
    match.detail = bound.detail = "mode " + std::to_string(config.fit_mode) + " not fitted" + (fm ? ": " + fm->note : "");
  } else {
    const double ratio = fm->fit.rate / report.sharp_rate;
    match.passed = std::abs(ratio - 1.0) <= config.rate_tol;
    match.detail = "fitted " + num(fm->fit.rate) + " (r2 " + num(fm->fit.r2) + ") vs P_{2,0} = " + num(report.sharp_rate) +
                   ", tolerance " + num(config.rate_tol);
    bound.passed = fm->fit.rate <= report.predicted_rate;
    bound.detail = "fitted " + num(fm->fit.rate) + " <= P_{2," + num(config.eps_report) + "} = " + num(report.predicted_rate);
  }
  report.verdicts.push_back(match);
  report.verdicts.push_back(bound);

  const double trap_max = *std::max_element(ts.trapping.begin(), ts.trapping.end());
  report.verdicts.push_back({"trapping", !ts.trapping_breached,
                             "max ||k||_" + std::to_string(2 * report.flow.p + 1) + " = " + num(trap_max) + " vs 2 delta W = " +
                                 num(ts.trapping_threshold),
                             true});
  double closure_max = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) closure_max = std::max({closure_max, ts.closure_plus[i], ts.closure_minus[i]});
  report.verdicts.push_back({"closure", closure_max <= config.closure_tol,
                             "max |U_+-| = " + num(closure_max) + " vs " + num(config.closure_tol), true});
  report.verdicts.push_back({"average_window", !ts.window_breached,
                             "khat0 in [" + num(*std::min_element(ts.khat0.begin(), ts.khat0.end())) + ", " +
                                 num(*std::max_element(ts.khat0.begin(), ts.khat0.end())) + "] vs (" + num(ts.window_low) +
                                 ", " + num(ts.window_high) + ")",
                             true});
  return report;
}

namespace {

double to_number(const std::string& field, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("field '" + field + "' expects a number, got '" + value + "'");
  }
}

int to_int(const std::string& field, const std::string& value) {
  const double v = to_number(field, value);
  if (v != std::floor(v)) throw Error("field '" + field + "' expects an integer, got '" + value + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& field, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error("field '" + field + "' expects true or false, got '" + value + "'");
}

}  // namespace

void apply_field(ExperimentConfig& c, const std::string& field, const std::string& value) {
  if (field.rfind("mode.", 0) == 0) {
    const int n = to_int(field, field.substr(5));
    c.modes[n] = to_number(field, value);
  } else if (field == "name") {
    c.name = value;
  } else if (field == "flow") {
    c.flow = value;
  } else if (field == "flip_sign") {
    c.flip_sign = to_bool(field, value);
  } else if (field == "W") {
    c.W = to_number(field, value);
  } else if (field == "enforce_closure") {
    c.enforce_closure = to_bool(field, value);
  } else if (field == "N") {
    c.N = to_int(field, value);
  } else if (field == "dt") {
    c.dt = to_number(field, value);
  } else if (field == "T") {
    c.T = to_number(field, value);
  } else if (field == "sample_every") {
    c.sample_every = to_int(field, value);
  } else if (field == "eps_report") {
    c.eps_report = to_number(field, value);
  } else if (field == "tol") {
    c.tol = to_number(field, value);
  } else if (field == "fit_window") {
    c.fit_window = to_number(field, value);
  } else if (field == "fit_mode") {
    c.fit_mode = to_int(field, value);
  } else if (field == "normalize_area") {
    c.normalize_area = to_bool(field, value);
  } else if (field == "rate_tol") {
    c.rate_tol = to_number(field, value);
  } else if (field == "closure_tol") {
    c.closure_tol = to_number(field, value);
  } else if (field == "force") {
    c.force = to_bool(field, value);
  } else if (field == "strict_monitors") {
    c.strict_monitors = to_bool(field, value);
  } else {
    throw Error("unknown config field '" + field + "'");
  }
}

SweepAxis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw Error("axis must look like field=v1,v2,... (got '" + text + "')");
  SweepAxis axis;
  axis.field = text.substr(0, eq);
  // flow specs such as builtin:familyII(2,1,1) contain commas; split only outside parentheses
  std::string current;
  int depth = 0;
  for (char ch : text.substr(eq + 1)) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      axis.values.push_back(current);
      current.clear();
    } else {
      current += ch;
    }
  }
  axis.values.push_back(current);
  for (const auto& v : axis.values) {
    if (v.empty()) throw Error("axis '" + axis.field + "' has an empty value");
  }
  return axis;
}

unsigned sweep_threads() {
  unsigned n = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CURVEFLOW_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

int exit_code(const ExperimentReport& report) {
  if (!report.passed()) return 3;
  return report.certified ? 0 : 2;
}

std::vector<SweepEntry> sweep(const ExperimentConfig& base, const std::vector<SweepAxis>& axes, unsigned threads) {
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();
  std::vector<SweepEntry> entries(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rest = i;
    for (std::size_t k = axes.size(); k-- > 0;) {
      const auto& a = axes[k];
      entries[i].assignment.emplace_back(a.field, a.values[rest % a.values.size()]);
      rest /= a.values.size();
    }
    std::reverse(entries[i].assignment.begin(), entries[i].assignment.end());
  }

  auto run_one = [&](SweepEntry& e) {
    try {
      ExperimentConfig c = base;
      for (const auto& [f, v] : e.assignment) apply_field(c, f, v);
      e.report = run_experiment(c);
      e.exit_code = exit_code(*e.report);
    } catch (const CertificationError& ex) {
      e.error = ex.what();
      e.exit_code = 2;
    } catch (const MonitorBreach& ex) {
      e.error = ex.what();
      e.exit_code = 3;
    } catch (const std::exception& ex) {
      e.error = ex.what();
      e.exit_code = 1;
    }
  };

  const unsigned workers = std::max(1U, std::min<unsigned>(threads ? threads : sweep_threads(), static_cast<unsigned>(total)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) run_one(entries[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return entries;
}

}  // namespace curveflow
