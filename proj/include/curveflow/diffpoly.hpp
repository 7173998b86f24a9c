#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "curveflow/rational.hpp"

namespace curveflow {

/// Exponent vector (a0, a1, ..., am): a_j is the power of the j-th theta
/// derivative of k. Canonical vectors carry no trailing zeros.
using Exponents = std::vector<unsigned>;

struct Monomial {
  Rational coeff;
  Exponents exps;
};

/// Sum over j >= 1 of a_j: the number of derivative factors in a term.
unsigned derivative_degree(const Exponents& exps);

/// Largest j >= 1 with a_j > 0, or 0 for a pure power of k.
unsigned max_derivative_order(const Exponents& exps);

/// Sum of all exponents.
unsigned total_degree(const Exponents& exps);

/// Graded lexicographic order on (total degree, exponent sequence).
bool graded_less(const Exponents& a, const Exponents& b);

/// Renders one term body such as "k^2 * k'{1} * k'{3}" (no coefficient).
std::string render_exponents(const Exponents& exps);

/// A polynomial in k and its theta-derivatives with exact rational
/// coefficients. Values are immutable once built; every constructor and
/// operation returns the canonical form (merged, zero-free, trimmed, sorted).
class DiffPoly {
 public:
  DiffPoly() = default;

  static DiffPoly normalize(std::vector<Monomial> terms);
  static DiffPoly constant(const Rational& c);
  /// The j-th theta derivative of k; j = 0 is k itself.
  static DiffPoly derivative(unsigned order);
  static DiffPoly curvature() { return derivative(0); }

  const std::vector<Monomial>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  std::size_t size() const noexcept { return terms_.size(); }

  /// Longest exponent vector; eval_at needs a jet at least this long.
  std::size_t jet_length() const;
  unsigned max_order() const;
  unsigned max_total_degree() const;

  /// Coefficient of the given exponent vector (zero when absent).
  Rational coefficient(const Exponents& exps) const;

  DiffPoly operator-() const;
  friend DiffPoly operator+(const DiffPoly& a, const DiffPoly& b);
  friend DiffPoly operator-(const DiffPoly& a, const DiffPoly& b);
  friend DiffPoly operator*(const DiffPoly& a, const DiffPoly& b);
  friend DiffPoly operator*(const Rational& s, const DiffPoly& p);
  friend bool operator==(const DiffPoly& a, const DiffPoly& b);

  /// Human-readable form: "c * k^a * k'{j}^b + ...", or "0".
  std::string to_string() const;

 private:
  std::vector<Monomial> terms_;
};

DiffPoly add(const DiffPoly& a, const DiffPoly& b);
DiffPoly mul(const DiffPoly& a, const DiffPoly& b);

/// Exact Leibniz derivative in theta.
DiffPoly d_theta(const DiffPoly& p);

/// Arclength derivative, d/ds = k d/dtheta on convex curves.
DiffPoly d_s(const DiffPoly& p);

/// Floating-point evaluation at jet = (k, k', k'', ...).
/// Throws Error("insufficient jet order") if the jet is too short.
double eval_at(const DiffPoly& p, std::span<const double> jet);

/// Flattened double-precision form of a DiffPoly for tight evaluation loops.
class CompiledPoly {
 public:
  explicit CompiledPoly(const DiffPoly& p);

  std::size_t jet_length() const noexcept { return jet_length_; }

  /// jet must hold at least jet_length() values.
  double operator()(const double* jet) const noexcept;

 private:
  struct Factor {
    unsigned order;
    unsigned power;
  };
  struct Term {
    double coeff;
    std::size_t first;
    std::size_t count;
  };
  std::vector<Term> terms_;
  std::vector<Factor> factors_;
  std::size_t jet_length_ = 0;
};

}  // namespace curveflow
