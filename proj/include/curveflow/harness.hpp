#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curveflow/flowc.hpp"
#include "curveflow/geometry.hpp"
#include "curveflow/spectral.hpp"
#include "curveflow/stability.hpp"

namespace curveflow {

struct RateFit {
  double rate = 0.0;
  double r2 = 0.0;
  std::size_t samples = 0;
};

/// Least-squares slope of log y against t over the last `window` fraction of
/// the time span. Throws on fewer than 8 samples or y <= 0 in the window.
RateFit fit_rate(std::span<const double> t, std::span<const double> y, double window = 0.6);

/// "builtin:<spec>" selects a builtin flow; anything else is flow source text.
FlowExpr resolve_flow(const std::string& text);

struct ExperimentConfig {
  std::string name = "run";
  std::string flow = "builtin:polyharmonic(1)";
  bool flip_sign = false;
  double W = 1.0;
  ModeMap modes;
  bool enforce_closure = true;
  int N = 32;
  double dt = 1e-3;
  double T = 0.5;
  int sample_every = 10;
  std::vector<double> betas;
  double eps_report = 0.05;
  double tol = 1e-4;
  double fit_window = 0.6;
  int fit_mode = 2;
  bool normalize_area = false;
  double rate_tol = 0.15;
  double closure_tol = 1e-3;
  /// Keep going after a certification refusal (the report records it).
  bool force = false;
  bool strict_monitors = false;

  /// Throws Error naming the first invalid field.
  void validate() const;
};

struct Verdict {
  std::string name;
  bool passed = false;
  std::string detail;
  /// Trapping, window and closure checks; their failure maps to exit code 3.
  bool monitor = false;
};

struct ModeRate {
  int n = 0;
  bool fitted = false;
  RateFit fit;
  std::string note;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string flow_id;
  CompiledFlow flow;
  bool certified = false;
  std::optional<StabilityCertificate> certificate;
  std::string refusal;
  TimeSeries series;
  std::vector<ModeRate> mode_rates;
  double khat0_T = 0.0;
  /// max - min of khat0 over the fit window.
  double khat0_drift = 0.0;
  double initial_area = 0.0;
  /// P_{2,0} and P_{2,eps_report} evaluated at W = khat0(T).
  double sharp_rate = 0.0;
  double predicted_rate = 0.0;
  std::vector<Verdict> verdicts;

  bool passed() const;
  bool monitor_failed() const;
  const ModeRate* mode(int n) const;
};

/// compile -> initial data -> (normalize_area) -> certify -> evolve -> fit -> verdicts.
/// Errors are rethrown with the stage name prefixed, keeping their type.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Sets one config field from text; "mode.<n>" sets a perturbation amplitude.
void apply_field(ExperimentConfig& config, const std::string& field, const std::string& value);

struct SweepAxis {
  std::string field;
  std::vector<std::string> values;
};

/// Parses "field=v1,v2,...".
SweepAxis parse_axis(const std::string& text);

struct SweepEntry {
  std::vector<std::pair<std::string, std::string>> assignment;
  std::optional<ExperimentReport> report;
  std::string error;
  int exit_code = 0;
};

/// Cartesian product of the axes (first axis slowest), run in parallel on up
/// to `threads` workers (0: hardware concurrency capped by CURVEFLOW_THREADS).
/// Results come back in product order regardless of scheduling.
std::vector<SweepEntry> sweep(const ExperimentConfig& base, const std::vector<SweepAxis>& axes, unsigned threads = 0);

/// Worker count honouring CURVEFLOW_THREADS.
unsigned sweep_threads();

/// Exit code for a finished report: 0 pass, 2 refused (forced), 3 failed check.
int exit_code(const ExperimentReport& report);

}  // namespace curveflow
