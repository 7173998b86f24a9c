#include "curveflow/report_io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "curveflow/errors.hpp"

namespace curveflow {

Json to_json(const DiffPoly& poly) {
  Json out = Json::array();
  for (const auto& t : poly.terms()) {
    Json term;
    term["coeff"] = rational_to_string(t.coeff);
    term["exps"] = t.exps;
    out.push_back(std::move(term));
  }
  return out;
}

DiffPoly diffpoly_from_json(const Json& j) {
  if (!j.is_array()) throw Error("differential polynomial must be a JSON array");
  std::vector<Monomial> terms;
  for (const auto& t : j) {
    terms.push_back(Monomial{parse_rational(t.at("coeff").get<std::string>()), t.at("exps").get<Exponents>()});
  }
  return DiffPoly::normalize(std::move(terms));
}

Json to_json(const CompiledFlow& flow) {
  Json out;
  out["name"] = flow.name;
  out["p"] = flow.p;
  out["M"] = flow.M;
  out["lead_sign"] = flow.lead_sign;
  out["lead_mag"] = rational_to_string(flow.lead_mag);
  out["pde"] = to_json(flow.pde);
  out["pde_text"] = flow.pde.to_string();
  out["G"] = to_json(flow.G);
  Json table = Json::array();
  for (const auto& [key, a] : flow.a_table) {
    table.push_back(Json{{"l", key.first}, {"j", key.second}, {"a", rational_to_string(a)}});
  }
  out["a_table"] = std::move(table);
  out["structure_ok"] = flow.structure_ok;
  out["violations"] = flow.violations;
  return out;
}

Json to_json(const StabilityCertificate& c) {
  Json out;
  out["flow_id"] = c.flow_id;
  out["p"] = c.p;
  out["M"] = c.M;
  out["W"] = c.W;
  out["delta_max"] = c.delta_max;
  out["delta"] = c.delta;
  out["seminorm"] = c.seminorm;
  out["c"] = c.c;
  out["argmax_n"] = c.argmax_n;
  out["tail_cutoff_n"] = c.tail_cutoff_n;
  out["tail_bound"] = c.tail_value;
  out["dominance_ok"] = c.dominance_ok;
  out["eps_report"] = c.eps_report;
  out["predicted_rate"] = c.predicted_rate;
  out["sharp_rate"] = c.sharp_rate;
  return out;
}

Json to_json(const SpectralState& s) {
  Json coeffs = Json::array();
  for (const Complex& c : s.coeffs) coeffs.push_back(Json::array({c.real(), c.imag()}));
  return Json{{"N", s.N}, {"time", s.time}, {"coeffs", std::move(coeffs)}};
}

SpectralState state_from_json(const Json& j) {
  const int N = j.at("N").get<int>();
  const Json& coeffs = j.at("coeffs");
  if (!coeffs.is_array() || coeffs.size() != static_cast<std::size_t>(N) + 1) {
    throw Error("state needs N + 1 = " + std::to_string(N + 1) + " coefficients");
  }
  SpectralState s(N);
  s.time = j.value("time", 0.0);
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    const Json& c = coeffs[n];
    s.coeffs[n] = c.is_array() ? Complex(c.at(0).get<double>(), c.at(1).get<double>()) : Complex(c.get<double>(), 0.0);
  }
  s.coeffs[0] = s.coeffs[0].real();
  return s;
}

Json to_json(const ExperimentConfig& c) {
  Json modes = Json::object();
  for (const auto& [n, a] : c.modes) {
    modes[std::to_string(n)] = a.imag() == 0.0 ? Json(a.real()) : Json::array({a.real(), a.imag()});
  }
  Json out;
  out["name"] = c.name;
  out["flow"] = c.flow;
  out["flip_sign"] = c.flip_sign;
  out["W"] = c.W;
  out["modes"] = std::move(modes);
  out["enforce_closure"] = c.enforce_closure;
  out["N"] = c.N;
  out["dt"] = c.dt;
  out["T"] = c.T;
  out["sample_every"] = c.sample_every;
  out["beta_list"] = c.betas;
  out["eps_report"] = c.eps_report;
  out["tol"] = c.tol;
  out["fit_window"] = c.fit_window;
  out["fit_mode"] = c.fit_mode;
  out["normalize_area"] = c.normalize_area;
  out["rate_tol"] = c.rate_tol;
  out["closure_tol"] = c.closure_tol;
  out["force"] = c.force;
  out["strict_monitors"] = c.strict_monitors;
  return out;
}

ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "name") {
        c.name = v.get<std::string>();
      } else if (key == "flow") {
        // "builtin:<spec>", a path ending in .flow, or flow source text
        const auto text = v.get<std::string>();
        std::filesystem::path p = text;
        if (p.extension() == ".flow") {
          if (p.is_relative()) p = base_dir / p;
          c.flow = read_text(p);
        } else {
          c.flow = text;
        }
      } else if (key == "flip_sign") {
        c.flip_sign = v.get<bool>();
      } else if (key == "W") {
        c.W = v.get<double>();
      } else if (key == "modes") {
        c.modes.clear();
        for (const auto& [n, a] : v.items()) {
          int wave = 0;
          try {
            wave = std::stoi(n);
          } catch (const std::exception&) {
            throw Error("mode key '" + n + "' is not an integer");
          }
          c.modes[wave] = a.is_array() ? Complex(a.at(0).get<double>(), a.at(1).get<double>()) : Complex(a.get<double>(), 0.0);
        }
      } else if (key == "enforce_closure") {
        c.enforce_closure = v.get<bool>();
      } else if (key == "N") {
        c.N = v.get<int>();
      } else if (key == "dt") {
        c.dt = v.get<double>();
      } else if (key == "T") {
        c.T = v.get<double>();
      } else if (key == "sample_every") {
        c.sample_every = v.get<int>();
      } else if (key == "beta_list") {
        c.betas = v.get<std::vector<double>>();
      } else if (key == "eps_report") {
        c.eps_report = v.get<double>();
      } else if (key == "tol") {
        c.tol = v.get<double>();
      } else if (key == "fit_window") {
        c.fit_window = v.get<double>();
      } else if (key == "fit_mode") {
        c.fit_mode = v.get<int>();
      } else if (key == "normalize_area") {
        c.normalize_area = v.get<bool>();
      } else if (key == "rate_tol") {
        c.rate_tol = v.get<double>();
      } else if (key == "closure_tol") {
        c.closure_tol = v.get<double>();
      } else if (key == "force") {
        c.force = v.get<bool>();
      } else if (key == "strict_monitors") {
        c.strict_monitors = v.get<bool>();
      } else {
        throw Error("unknown config key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

Json to_json(const ExperimentReport& r, const std::string& series_path) {
  Json out;
  out["name"] = r.config.name;
  out["flow_id"] = r.flow_id;
  out["passed"] = r.passed();
  out["certified"] = r.certified;
  out["certificate"] = r.certificate ? to_json(*r.certificate) : Json(nullptr);
  out["refusal"] = r.refusal;
  out["verdicts"] = Json::array();
  for (const auto& v : r.verdicts) {
    out["verdicts"].push_back(Json{{"name", v.name}, {"passed", v.passed}, {"monitor", v.monitor}, {"detail", v.detail}});
  }
  out["sharp_rate"] = r.sharp_rate;
  out["predicted_rate"] = r.predicted_rate;
  out["mode_rates"] = Json::array();
  for (const auto& m : r.mode_rates) {
    Json e{{"n", m.n}, {"fitted", m.fitted}};
    if (m.fitted) {
      e["rate"] = m.fit.rate;
      e["r2"] = m.fit.r2;
      e["samples"] = m.fit.samples;
    } else {
      e["note"] = m.note;
    }
    out["mode_rates"].push_back(std::move(e));
  }
  out["khat0_T"] = r.khat0_T;
  out["khat0_drift"] = r.khat0_drift;
  out["initial_area"] = r.initial_area;
  const TimeSeries& ts = r.series;
  out["monitors"] = Json{{"delta", ts.delta},
                         {"trapping_threshold", ts.trapping_threshold},
                         {"window", Json::array({ts.window_low, ts.window_high})},
                         {"trapping_breached", ts.trapping_breached},
                         {"window_breached", ts.window_breached}};
  out["series_csv"] = series_path;
  out["config"] = to_json(r.config);
  out["flow"] = to_json(r.flow);
  out["initial_state"] = to_json(ts.initial);
  out["final_state"] = to_json(ts.final_state);
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepAxis>& axes, const std::vector<SweepEntry>& entries) {
  for (const auto& a : axes) out << csv_field(a.field) << ",";
  out << "exit_code,fitted_rate,r2,sharp_rate,predicted_rate,khat0_T,passed,error\n";
  out << std::setprecision(17);
  for (const auto& e : entries) {
    for (const auto& [f, v] : e.assignment) out << csv_field(v) << ",";
    out << e.exit_code << ",";
    if (e.report) {
      const ModeRate* m = e.report->mode(e.report->config.fit_mode);
      if (m != nullptr && m->fitted) {
        out << m->fit.rate << "," << m->fit.r2 << ",";
      } else {
        out << ",,";
      }
      out << e.report->sharp_rate << "," << e.report->predicted_rate << "," << e.report->khat0_T << ","
          << (e.report->passed() ? "true" : "false") << ",";
    } else {
      out << ",,,,,false,";
    }
    out << csv_field(e.error) << "\n";
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace curveflow
