#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "curveflow/errors.hpp"
#include "curveflow/geometry.hpp"
#include "curveflow/harness.hpp"
#include "curveflow/report_io.hpp"
#include "curveflow/stability.hpp"

namespace py = pybind11;
using namespace curveflow;

namespace {

py::object fraction(const Rational& r) {
  static py::object Fraction = py::module_::import("fractions").attr("Fraction");
  return Fraction(rational_to_string(r));
}

py::array_t<Complex> coeff_array(const SpectralState& s) {
  py::array_t<Complex> out(static_cast<py::ssize_t>(s.coeffs.size()));
  std::copy(s.coeffs.begin(), s.coeffs.end(), out.mutable_data());
  return out;
}

SpectralState state_from_array(py::array_t<Complex, py::array::c_style | py::array::forcecast> coeffs, double time) {
  if (coeffs.ndim() != 1 || coeffs.size() < 2) throw Error("coefficients must be a 1-d array of length N + 1 >= 2");
  SpectralState s(static_cast<int>(coeffs.size()) - 1);
  std::copy(coeffs.data(), coeffs.data() + coeffs.size(), s.coeffs.begin());
  s.coeffs[0] = s.coeffs[0].real();
  s.time = time;
  return s;
}

py::object json_to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json py_to_json(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Curvature flow compiler, stability certificates and spectral simulation";

  auto base = py::register_exception<Error>(m, "CurveflowError");
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<ClassificationError>(m, "ClassificationError", base);
  py::register_exception<CertificationError>(m, "CertificationError", base);
  py::register_exception<MonitorBreach>(m, "MonitorBreach", base);

  py::class_<CompiledFlow>(m, "CompiledFlow")
      .def_readonly("name", &CompiledFlow::name)
      .def_readonly("p", &CompiledFlow::p)
      .def_readonly("M", &CompiledFlow::M)
      .def_readonly("lead_sign", &CompiledFlow::lead_sign)
      .def_property_readonly("lead_mag", [](const CompiledFlow& f) { return fraction(f.lead_mag); })
      .def_readonly("structure_ok", &CompiledFlow::structure_ok)
      .def_readonly("violations", &CompiledFlow::violations)
      .def_property_readonly("a_table",
                             [](const CompiledFlow& f) {
                               py::dict d;
                               for (const auto& [key, a] : f.a_table) d[py::make_tuple(key.first, key.second)] = fraction(a);
                               return d;
                             })
      .def_property_readonly("terms",
                             [](const CompiledFlow& f) {
                               py::list out;
                               for (const auto& t : f.pde.terms()) out.append(py::make_tuple(fraction(t.coeff), py::tuple(py::cast(t.exps))));
                               return out;
                             })
      .def("pde_text", [](const CompiledFlow& f) { return f.pde.to_string(); })
      .def("to_dict", [](const CompiledFlow& f) { return json_to_py(to_json(f)); })
      .def("__repr__", [](const CompiledFlow& f) { return "<CompiledFlow " + f.name + " p=" + std::to_string(f.p) + ">"; });

  m.def(
      "compile_flow", [](const std::string& source, bool flip_sign) { return compile_flow(resolve_flow(source), flip_sign); },
      py::arg("source"), py::arg("flip_sign") = false,
      "Compile flow source text (or 'builtin:<spec>') into its curvature equation.");

  m.def("p_n_eps", &p_n_eps, py::arg("flow"), py::arg("W"), py::arg("eps"), py::arg("n"));
  m.def(
      "p_n_eps_exact",
      [](const CompiledFlow& f, const std::string& W, const std::string& eps, int n) {
        return fraction(stability_polynomial<Rational>(f, parse_rational(W), parse_rational(eps), n));
      },
      py::arg("flow"), py::arg("W"), py::arg("eps"), py::arg("n"));
  m.def("linear_eigenvalue", [](const CompiledFlow& f, int n) { return fraction(linear_eigenvalue(f, n)); }, py::arg("flow"),
        py::arg("n"));
  m.def(
      "sup_p",
      [](const CompiledFlow& f, double W, double delta) {
        const SupResult r = sup_p(f, W, delta);
        return py::dict(py::arg("c") = r.c, py::arg("argmax_n") = r.argmax_n, py::arg("tail_cutoff_n") = r.tail_cutoff_n,
                        py::arg("tail_bound") = r.tail_value);
      },
      py::arg("flow"), py::arg("W"), py::arg("delta"));
  m.def(
      "dominance_check", [](const CompiledFlow& f, double W, double delta, int cells) { return dominance_check(f, W, delta, cells).ok; },
      py::arg("flow"), py::arg("W"), py::arg("delta"), py::arg("cells") = 256);
  m.def("max_delta", &max_delta, py::arg("flow"), py::arg("W"), py::arg("tol") = 1e-4);
  m.def(
      "family_criteria",
      [](const std::string& kind, unsigned p, const std::vector<std::string>& a) {
        if (kind != "I" && kind != "II") throw Error("family kind must be 'I' or 'II'");
        std::vector<Rational> coeffs;
        for (const auto& s : a) coeffs.push_back(parse_rational(s));
        return family_criteria(kind == "I" ? FamilyKind::I : FamilyKind::II, p, coeffs);
      },
      py::arg("kind"), py::arg("p"), py::arg("a"));

  py::class_<SpectralState>(m, "SpectralState")
      .def(py::init([](py::array_t<Complex, py::array::c_style | py::array::forcecast> c, double t) { return state_from_array(c, t); }),
           py::arg("coeffs"), py::arg("time") = 0.0)
      .def_readonly("N", &SpectralState::N)
      .def_readonly("time", &SpectralState::time)
      .def_property_readonly("coeffs", &coeff_array)
      .def("average", &SpectralState::average)
      .def("samples", [](const SpectralState& s, std::size_t grid) { return to_samples(s, grid); }, py::arg("grid"));

  m.def(
      "certify",
      [](const CompiledFlow& f, const SpectralState& psi, double eps_report, double tol) {
        CertifyOptions o;
        o.eps_report = eps_report;
        o.tol = tol;
        return json_to_py(to_json(certify(f, psi, o)));
      },
      py::arg("flow"), py::arg("psi"), py::arg("eps_report") = 0.05, py::arg("tol") = 1e-4);

  m.def(
      "make_initial",
      [](double W, const std::map<int, Complex>& modes, bool enforce, int N) { return make_initial(W, modes, enforce, N); },
      py::arg("W"), py::arg("modes"), py::arg("enforce_closure") = true, py::arg("N") = 32);
  m.def("seminorm", &seminorm, py::arg("state"), py::arg("beta"));
  m.def(
      "closure_defect",
      [](const SpectralState& s) {
        const ClosureDefect d = closure_defect(s);
        return py::make_tuple(d.plus, d.minus);
      },
      py::arg("state"));
  m.def("rhs_direct", [](const SpectralState& s, const CompiledFlow& f) { return rhs_direct(s, f).total(); }, py::arg("state"),
        py::arg("flow"));
  m.def("rhs_pseudospectral", &rhs_pseudospectral, py::arg("state"), py::arg("flow"));
  m.def("step", &step, py::arg("state"), py::arg("flow"), py::arg("dt"));
  m.def("enclosed_area", &enclosed_area, py::arg("state"));
  m.def("normalize_area", &normalize_area, py::arg("state"), py::arg("target") = 3.14159265358979323846);
  m.def(
      "reconstruct",
      [](const SpectralState& s, std::size_t samples) {
        const CurvePoints c = reconstruct(s, samples);
        return py::dict(py::arg("theta") = c.theta, py::arg("x") = c.x, py::arg("y") = c.y,
                        py::arg("closure_gap") = c.closure_gap, py::arg("perimeter") = c.perimeter);
      },
      py::arg("state"), py::arg("samples") = 0);

  m.def(
      "fit_rate",
      [](const std::vector<double>& t, const std::vector<double>& y, double window) {
        const RateFit f = fit_rate(t, y, window);
        return py::make_tuple(f.rate, f.r2);
      },
      py::arg("t"), py::arg("y"), py::arg("window") = 0.6);
  m.def(
      "run_experiment",
      [](const py::dict& config) {
        const ExperimentReport r = run_experiment(config_from_json(py_to_json(config)));
        return json_to_py(to_json(r, ""));
      },
      py::arg("config"), "Run one experiment; `config` uses the same keys as the JSON config files.");
}
