#include "curveflow/flowc.hpp"

#include <cctype>
#include <sstream>

#include "curveflow/errors.hpp"

namespace curveflow {

namespace {

DiffPoly expand_node(const FlowNode& node) {
  using K = FlowNode::Kind;
  switch (node.kind) {
    case K::Curvature:
      return DiffPoly::curvature();
    case K::ArcDerivative: {
      DiffPoly p = DiffPoly::curvature();
      for (unsigned m = 0; m < node.order; ++m) p = d_s(p);
      return p;
    }
    case K::Constant:
      return DiffPoly::constant(node.value);
    case K::Sum:
      return expand_node(*node.children[0]) + expand_node(*node.children[1]);
    case K::Difference:
      return expand_node(*node.children[0]) - expand_node(*node.children[1]);
    case K::Product:
      return expand_node(*node.children[0]) * expand_node(*node.children[1]);
    case K::Negate:
      return -expand_node(*node.children[0]);
    case K::Power: {
      DiffPoly base = expand_node(*node.children[0]);
      DiffPoly out = DiffPoly::constant(Rational(1));
      for (unsigned i = 0; i < node.order; ++i) out = out * base;
      return out;
    }
  }
  return {};
}

Exponents leading_exponents(unsigned M, unsigned order) {
  Exponents e(order + 1, 0);
  e[0] = M;
  e[order] = 1;
  return e;
}

std::string render_rational(const Rational& r) {
  std::ostringstream out;
  out << r;
  std::string s = out.str();
  return s.front() == '-' ? "(" + s + ")" : s;
}

}  // namespace

DiffPoly expand_arclength(const FlowExpr& flow) {
  if (!flow.root) throw Error("empty flow expression");
  return expand_node(*flow.root);
}

DiffPoly curvature_pde(const DiffPoly& speed) {
  DiffPoly k = DiffPoly::curvature();
  return d_s(d_s(speed)) + k * k * speed;
}

DiffPoly CompiledFlow::reconstruct() const {
  Rational lead = lead_sign > 0 ? lead_mag : Rational(-lead_mag);
  return DiffPoly::normalize({Monomial{lead, leading_exponents(M, 2 * p)}}) + G;
}

std::vector<std::string> structure_check(const DiffPoly& G) {
  std::vector<std::string> out;
  for (const auto& t : G.terms()) {
    unsigned degree = derivative_degree(t.exps);
    if (degree == 0) {
      out.push_back("term " + render_exponents(t.exps) + " has derivative degree 0");
    } else if (degree == 1) {
      unsigned order = max_derivative_order(t.exps);
      if (order % 2 == 1) {
        out.push_back("term " + render_exponents(t.exps) + " has a single derivative factor of odd order " +
                      std::to_string(order));
      }
    }
  }
  return out;
}

CompiledFlow classify(const DiffPoly& pde) {
  if (pde.is_zero()) throw ClassificationError("no leading term: the curvature equation is identically zero");
  unsigned top = pde.max_order();
  if (top == 0) throw ClassificationError("no leading term: the curvature equation contains no derivatives");
  if (top % 2 == 1) {
    throw ClassificationError("no leading term: the highest derivative has odd order " + std::to_string(top));
  }

  const Monomial* leading = nullptr;
  for (const auto& t : pde.terms()) {
    if (max_derivative_order(t.exps) != top) continue;
    if (t.exps[top] >= 2) {
      throw ClassificationError("no leading term: derivative of order " + std::to_string(top) +
                                " appears with exponent " + std::to_string(t.exps[top]));
    }
    if (derivative_degree(t.exps) != 1) {
      throw ClassificationError("no leading term: derivative of order " + std::to_string(top) +
                                " is multiplied by other derivatives in " + render_exponents(t.exps));
    }
    if (leading != nullptr) {
      throw ClassificationError("no leading term: derivative of order " + std::to_string(top) +
                                " appears in more than one term");
    }
    leading = &t;
  }

  CompiledFlow flow;
  flow.pde = pde;
  flow.p = top / 2;
  flow.M = leading->exps[0];
  flow.lead_sign = leading->coeff > 0 ? 1 : -1;
  flow.lead_mag = flow.lead_sign > 0 ? leading->coeff : Rational(-leading->coeff);
  flow.G = pde - DiffPoly::normalize({Monomial{leading->coeff, leading->exps}});

  for (const auto& t : flow.G.terms()) {
    if (derivative_degree(t.exps) != 1) continue;
    unsigned order = max_derivative_order(t.exps);
    if (order % 2 == 0 && order / 2 >= 1 && order / 2 < flow.p) {
      flow.a_table.emplace(std::make_pair(order / 2, t.exps[0]), t.coeff);
    }
  }

  flow.violations = structure_check(flow.G);
  int expected = (flow.p % 2 == 1) ? 1 : -1;  // (-1)^{p+1}
  if (flow.lead_sign != expected) {
    flow.violations.push_back("leading coefficient has sign " + std::to_string(flow.lead_sign) + ", parabolicity needs " +
                              std::to_string(expected));
  }
  flow.structure_ok = flow.violations.empty();
  return flow;
}

CompiledFlow compile_flow(const FlowExpr& flow, bool flip_sign) {
  DiffPoly speed = expand_arclength(flow);
  if (flip_sign) speed = -speed;
  CompiledFlow compiled = classify(curvature_pde(speed));
  compiled.name = flow.name.empty() ? "F = " + to_source(*flow.root) : flow.name;
  return compiled;
}

namespace {

std::string render_h_term(const ArclengthTerm& t) {
  std::string out = render_rational(t.coeff);
  for (std::size_t m = 0; m < t.exps.size(); ++m) {
    if (t.exps[m] == 0) continue;
    std::string base = m == 0 ? std::string("k") : "ds(k," + std::to_string(m) + ")";
    out += " * " + base;
    if (t.exps[m] > 1) out += "^" + std::to_string(t.exps[m]);
  }
  return out;
}

void check_h_terms(const BuiltinParams& params) {
  for (const auto& t : params.h_terms) {
    unsigned factors = 0;
    unsigned order = 0;
    for (std::size_t m = 1; m < t.exps.size(); ++m) {
      factors += t.exps[m];
      if (t.exps[m] > 0) order = static_cast<unsigned>(m);
    }
    if (factors < 2) {
      throw Error("inadmissible H-term " + render_h_term(t) + ": needs at least two derivative factors of order >= 1");
    }
    if (order >= 2 * params.p) {
      throw Error("inadmissible H-term " + render_h_term(t) + ": derivative order must be below 2p = " +
                  std::to_string(2 * params.p));
    }
  }
}

std::string join_terms(const std::vector<std::string>& terms) {
  if (terms.empty()) return "0";
  std::string out = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) out += " + " + terms[i];
  return out;
}

std::string ds_text(unsigned m) { return "ds(k," + std::to_string(m) + ")"; }

}  // namespace

FlowExpr builtin_flow(std::string_view name, const BuiltinParams& params) {
  if (name == "polyharmonic") {
    if (params.p < 1) throw Error("polyharmonic flow needs p >= 1");
    std::string sign = params.p % 2 == 1 ? "-" : "";
    return parse_flow("F = " + sign + ds_text(2 * params.p));
  }
  if (name == "example32") return parse_flow("F = -(k * ds(k,2))");
  if (name == "gradient_elastic") return parse_flow("F = ds(k,4) + k^2 * ds(k,2) - 1/2 * k * ds(k,1)^2");
  if (name == "familyI" || name == "familyII") {
    if (params.p < 1) throw Error(std::string(name) + " needs p >= 1");
    if (params.a.size() != params.p) throw Error(std::string(name) + " needs exactly p coefficients a_1..a_p");
    check_h_terms(params);
    std::vector<std::string> terms;
    if (name == "familyI") {
      for (unsigned j = 1; j <= params.p; ++j) {
        if (params.a[j - 1] != 0) terms.push_back(render_rational(params.a[j - 1]) + " * " + ds_text(2 * j));
      }
    } else {
      for (unsigned j = 0; j < params.p; ++j) {
        const Rational& a = params.a[params.p - j - 1];
        if (a == 0) continue;
        std::string t = render_rational(a);
        if (j > 0) t += " * k^" + std::to_string(2 * j);
        terms.push_back(t + " * " + ds_text(2 * params.p - 2 * j));
      }
    }
    for (const auto& h : params.h_terms) terms.push_back(render_h_term(h));
    return parse_flow("F = " + join_terms(terms));
  }
  throw Error("unknown builtin flow '" + std::string(name) + "'");
}

FlowExpr builtin_flow_from_spec(std::string_view spec) {
  std::string_view name = spec;
  std::vector<std::string> args;
  if (auto open = spec.find('('); open != std::string_view::npos) {
    if (spec.back() != ')') throw Error("malformed builtin '" + std::string(spec) + "'");
    name = spec.substr(0, open);
    std::string inner(spec.substr(open + 1, spec.size() - open - 2));
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) args.push_back(item);
  }
  while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.remove_suffix(1);

  BuiltinParams params;
  if (name == "polyharmonic") {
    if (args.size() != 1) throw Error("polyharmonic(p) takes one argument");
    params.p = static_cast<unsigned>(std::stoul(args[0]));
  } else if (name == "familyI" || name == "familyII") {
    if (args.empty()) throw Error(std::string(name) + "(p, a_1, ..., a_p) needs arguments");
    params.p = static_cast<unsigned>(std::stoul(args[0]));
    for (std::size_t i = 1; i < args.size(); ++i) params.a.push_back(parse_rational(args[i]));
  } else if (!args.empty()) {
    throw Error("builtin '" + std::string(name) + "' takes no arguments");
  }
  FlowExpr flow = builtin_flow(name, params);
  flow.name = "builtin:" + std::string(spec);
  return flow;
}

}  // namespace curveflow
