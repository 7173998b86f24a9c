#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace curveflow {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Always "num/den", e.g. "-11/1".
std::string rational_to_string(const Rational& r);

/// Accepts "n", "n/d" and plain decimals such as "-0.5" (converted exactly).
Rational parse_rational(std::string_view text);

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Integer power for any ring-like type (Rational, double, complex).
template <class T>
T ipow(T base, unsigned exponent) {
  T result(1);
  while (exponent > 0) {
    if (exponent & 1U) result *= base;
    base *= base;
    exponent >>= 1U;
  }
  return result;
}

}  // namespace curveflow
