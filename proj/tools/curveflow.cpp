// curveflow command line tool.
//
// Exit codes: 0 pass, 1 usage or I/O error, 2 certification refusal,
// 3 runtime monitor breach or failed verdict.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "curveflow/errors.hpp"
#include "curveflow/geometry.hpp"
#include "curveflow/harness.hpp"
#include "curveflow/report_io.hpp"
#include "curveflow/stability.hpp"

namespace fs = std::filesystem;
using namespace curveflow;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRefused = 2;
constexpr int kExitBreach = 3;

FlowExpr load_flow(const std::string& arg) {
  if (arg.rfind("builtin:", 0) == 0) return resolve_flow(arg);
  if (!fs::exists(arg) && fs::path(arg).extension() != ".flow") return parse_flow(arg);
  FlowExpr flow = parse_flow(read_text(arg));
  flow.name = fs::path(arg).stem().string();
  return flow;
}

int cmd_compile(const std::string& file, bool flip, const std::string& out) {
  const CompiledFlow flow = compile_flow(load_flow(file), flip);
  const std::string text = to_json(flow).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
  if (!flow.structure_ok) {
    for (const auto& v : flow.violations) std::cerr << "structure violation: " << v << "\n";
    return kExitRefused;
  }
  return 0;
}

int cmd_analyze(const std::string& file, bool flip, double W, double eps, double tol, double delta) {
  const CompiledFlow flow = compile_flow(load_flow(file), flip);
  CertifyOptions opts;
  opts.eps_report = eps;
  opts.tol = tol;
  const double d = delta >= 0.0 ? delta : max_delta(flow, W, tol);
  const StabilityCertificate cert = certify_at(flow, W, d, opts);
  std::cout << to_json(cert).dump(2) << "\n";
  return cert.dominance_ok ? 0 : kExitRefused;
}

void print_report(const ExperimentReport& r) {
  std::cerr << r.config.name << " [" << r.flow_id << "]" << (r.certified ? "" : " (uncertified: " + r.refusal + ")")
            << "\n";
  for (const auto& v : r.verdicts) std::cerr << "  " << (v.passed ? "pass" : "FAIL") << "  " << v.name << ": " << v.detail << "\n";
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, bool force, bool strict) {
  ExperimentConfig config = config_from_json(read_json(config_path), fs::path(config_path).parent_path());
  config.force = config.force || force;
  config.strict_monitors = config.strict_monitors || strict;
  const ExperimentReport report = run_experiment(config);

  const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  const fs::path csv = dir / (config.name + ".csv");
  const fs::path json = dir / (config.name + ".json");
  std::ostringstream series;
  report.series.write_csv(series);
  write_text(csv, series.str());
  write_text(json, to_json(report, csv.filename().string()).dump(2) + "\n");
  print_report(report);
  std::cout << json.string() << "\n";
  return exit_code(report);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

int cmd_rates(const std::string& csv_path, int mode, double window) {
  std::istringstream in(read_text(csv_path));
  std::string line;
  if (!std::getline(in, line)) throw Error("empty CSV '" + csv_path + "'");
  const auto header = split_csv_line(line);
  const std::string column = "abs_khat_" + std::to_string(mode);
  const auto t_it = std::find(header.begin(), header.end(), "t");
  const auto y_it = std::find(header.begin(), header.end(), column);
  if (t_it == header.end() || y_it == header.end()) throw Error("CSV lacks columns 't' and '" + column + "'");
  const auto ti = static_cast<std::size_t>(t_it - header.begin());
  const auto yi = static_cast<std::size_t>(y_it - header.begin());
  std::vector<double> t, y;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw Error("ragged CSV row: " + line);
    t.push_back(std::stod(cells[ti]));
    y.push_back(std::stod(cells[yi]));
  }
  const RateFit fit = fit_rate(t, y, window);
  std::cout << Json{{"mode", mode}, {"window", window}, {"rate", fit.rate}, {"r2", fit.r2}, {"samples", fit.samples}}.dump(2)
            << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& axis_text, const std::string& out_dir,
              unsigned threads) {
  const ExperimentConfig base = config_from_json(read_json(config_path), fs::path(config_path).parent_path());
  std::vector<SweepAxis> axes;
  for (const auto& a : axis_text) axes.push_back(parse_axis(a));
  const auto entries = sweep(base, axes, threads);

  const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  std::ostringstream csv;
  write_sweep_csv(csv, axes, entries);
  write_text(dir / (base.name + "_sweep.csv"), csv.str());
  Json runs = Json::array();
  int worst = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    Json assignment = Json::object();
    for (const auto& [f, v] : e.assignment) assignment[f] = v;
    Json run{{"index", i}, {"assignment", assignment}, {"exit_code", e.exit_code}};
    if (e.report) {
      run["report"] = to_json(*e.report, "");
    } else {
      run["error"] = e.error;
    }
    runs.push_back(std::move(run));
    worst = std::max(worst, e.exit_code);
    std::cerr << i << ": exit " << e.exit_code << (e.error.empty() ? "" : "  " + e.error) << "\n";
  }
  write_text(dir / (base.name + "_sweep.json"), runs.dump(2) + "\n");
  std::cout << (dir / (base.name + "_sweep.csv")).string() << "\n";
  return worst;
}

void write_points(const fs::path& path, const CurvePoints& c) {
  std::ostringstream out;
  out.precision(17);
  out << "theta,x,y\n";
  for (std::size_t i = 0; i < c.theta.size(); ++i) out << c.theta[i] << "," << c.x[i] << "," << c.y[i] << "\n";
  out << 2.0 * std::numbers::pi << "," << c.x.front() << "," << c.y.front() << "\n";
  write_text(path, out.str());
}

int cmd_curve(const std::string& state_path, const std::string& prefix_arg, std::size_t samples) {
  const Json j = read_json(state_path);
  std::vector<std::pair<std::string, SpectralState>> states;
  if (j.contains("final_state")) {
    states.emplace_back("initial", state_from_json(j.at("initial_state")));
    states.emplace_back("final", state_from_json(j.at("final_state")));
  } else {
    states.emplace_back("state", state_from_json(j));
  }
  const fs::path prefix = prefix_arg.empty() ? fs::path(state_path).replace_extension("") : fs::path(prefix_arg);
  std::ostringstream gp;
  gp << "set datafile separator ','\nset size ratio -1\nset key outside\nplot";
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& [label, s] = states[i];
    const CurvePoints c = reconstruct(s, samples);
    const fs::path csv = prefix.string() + "_" + label + ".csv";
    write_points(csv, c);
    gp << (i ? ", \\\n    " : " ") << "'" << csv.filename().string() << "' skip 1 using 2:3 with lines title '" << label
       << " (t = " << s.time << ")'";
    std::cerr << label << ": closure gap " << c.closure_gap << ", perimeter " << c.perimeter << ", area " << enclosed_area(s)
              << "\n";
  }
  gp << "\n";
  write_text(prefix.string() + ".gp", gp.str());
  std::cout << prefix.string() + ".gp" << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature flow compiler, stability analyzer and spectral simulator"};
  app.require_subcommand(1);

  std::string file, out, config, csv;
  bool flip = false, force = false, strict = false;
  double W = 1.0, eps = 0.05, tol = 1e-4, delta = -1.0, window = 0.6;
  int mode = 2;
  unsigned threads = 0;
  std::size_t samples = 0;
  std::vector<std::string> axes;

  auto* compile = app.add_subcommand("compile", "Compile a normal speed into its curvature equation");
  compile->add_option("flow", file, "Flow file, builtin:<spec> or flow source text")->required();
  compile->add_flag("--flip-sign", flip, "Negate the speed before compiling");
  compile->add_option("-o,--out", out, "Write JSON here instead of stdout");

  auto* analyze = app.add_subcommand("analyze", "Stability certificate for a flow at average curvature W");
  analyze->add_option("flow", file, "Flow file, builtin:<spec> or flow source text")->required();
  analyze->add_option("--W", W, "Average curvature")->check(CLI::PositiveNumber);
  analyze->add_option("--eps-report", eps, "Reporting epsilon for the predicted rate");
  analyze->add_option("--tol", tol, "Bisection tolerance for delta_max");
  analyze->add_option("--delta", delta, "Certify at this delta instead of delta_max");
  analyze->add_flag("--flip-sign", flip, "Negate the speed before compiling");

  auto* simulate = app.add_subcommand("simulate", "Run one experiment from a JSON config");
  simulate->add_option("config", config, "Experiment config")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--out", out, "Output directory");
  simulate->add_flag("--force", force, "Continue past a certification refusal");
  simulate->add_flag("--strict", strict, "Abort on the first monitor breach");

  auto* rates = app.add_subcommand("rates", "Fit the decay rate of one mode column of a run CSV");
  rates->add_option("csv", csv, "Time series CSV")->required()->check(CLI::ExistingFile);
  rates->add_option("--mode", mode, "Wavenumber")->check(CLI::PositiveNumber);
  rates->add_option("--window", window, "Trailing fraction of the run to fit");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run the Cartesian product of config axes");
  sweep_cmd->add_option("config", config, "Base experiment config")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--axis", axes, "field=v1,v2,... (repeatable)");
  sweep_cmd->add_option("-o,--out", out, "Output directory");
  sweep_cmd->add_option("--threads", threads, "Worker threads (default: CURVEFLOW_THREADS or all cores)");

  auto* curve = app.add_subcommand("curve", "Reconstruct curves from a state or run report");
  curve->add_option("state", file, "State JSON or run report JSON")->required()->check(CLI::ExistingFile);
  curve->add_option("-o,--out", out, "Output prefix for CSV and gnuplot files");
  curve->add_option("--samples", samples, "Points per curve (default 16N)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*compile) return cmd_compile(file, flip, out);
    if (*analyze) return cmd_analyze(file, flip, W, eps, tol, delta);
    if (*simulate) return cmd_simulate(config, out, force, strict);
    if (*rates) return cmd_rates(csv, mode, window);
    if (*sweep_cmd) return cmd_sweep(config, axes, out, threads);
    if (*curve) return cmd_curve(file, out, samples);
  } catch (const CertificationError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitRefused;
  } catch (const ClassificationError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitRefused;
  } catch (const MonitorBreach& e) {
    std::cerr << "monitor breach: " << e.what() << "\n";
    return kExitBreach;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
