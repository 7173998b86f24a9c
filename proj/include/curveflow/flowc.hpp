#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "curveflow/diffpoly.hpp"
#include "curveflow/rational.hpp"

namespace curveflow {

/// Expression tree of a normal speed F(k, k_s, k_ss, ...).
struct FlowNode {
  enum class Kind { Curvature, ArcDerivative, Constant, Sum, Difference, Product, Negate, Power };

  Kind kind = Kind::Constant;
  Rational value;        // Constant
  unsigned order = 0;    // ArcDerivative: m in ds(k,m); Power: exponent
  std::vector<std::shared_ptr<const FlowNode>> children;
};

struct FlowExpr {
  /// Identifier used in reports; defaults to the canonical "F = ..." form.
  std::string name;
  std::string source;
  std::shared_ptr<const FlowNode> root;
};

/// Parses `F = <expr>`; the "F =" prefix is optional. Lines starting with
/// '#' are comments. Throws ParseError with a character offset.
FlowExpr parse_flow(std::string_view text);

/// Replaces every ds(k,m) by d_s applied m times to k.
DiffPoly expand_arclength(const FlowExpr& flow);

/// Curvature evolution for normal speed F: dk/dt = d_s^2 F + k^2 F.
DiffPoly curvature_pde(const DiffPoly& speed);

/// Classified curvature PDE
///   dk/dt = lead_sign * lead_mag * k^M * d^{2p}k/dtheta^{2p} + G
/// with the linear coefficients of G tabulated by (l, j).
struct CompiledFlow {
  std::string name;
  DiffPoly pde;
  unsigned p = 0;
  unsigned M = 0;
  int lead_sign = 1;
  Rational lead_mag{1};
  DiffPoly G;
  /// (l, j) -> coefficient of k^j * d^{2l}k/dtheta^{2l} in G, 1 <= l < p.
  std::map<std::pair<unsigned, unsigned>, Rational> a_table;
  bool structure_ok = true;
  std::vector<std::string> violations;

  /// lead_sign * lead_mag * k^M * d^{2p}k + G.
  DiffPoly reconstruct() const;
};

/// Throws ClassificationError when no unique leading term exists.
CompiledFlow classify(const DiffPoly& pde);

/// Violations of the structure condition on G (empty when admissible).
std::vector<std::string> structure_check(const DiffPoly& G);

/// parse -> expand -> curvature_pde -> classify. flip_sign negates F.
CompiledFlow compile_flow(const FlowExpr& flow, bool flip_sign = false);

/// One term of an additional polynomial H in arclength derivatives:
/// exps[m] is the power of ds(k,m), exps[0] the power of k.
struct ArclengthTerm {
  Rational coeff;
  std::vector<unsigned> exps;
};

struct BuiltinParams {
  unsigned p = 1;
  /// a[0] = a_1, ..., a[p-1] = a_p.
  std::vector<Rational> a;
  std::vector<ArclengthTerm> h_terms;
};

/// Named flows: polyharmonic, example32, familyI, familyII, gradient_elastic.
FlowExpr builtin_flow(std::string_view name, const BuiltinParams& params = {});

/// Accepts "polyharmonic(2)", "example32", "gradient_elastic",
/// "familyI(p, a_1, ..., a_p)" and "familyII(p, a_1, ..., a_p)".
FlowExpr builtin_flow_from_spec(std::string_view spec);

/// Renders an AST back to DSL text (without the "F =" prefix).
std::string to_source(const FlowNode& node);

}  // namespace curveflow
