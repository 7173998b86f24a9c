#include "curveflow/diffpoly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "curveflow/errors.hpp"

namespace curveflow {

std::string rational_to_string(const Rational& r) {
  std::ostringstream out;
  out << boost::multiprecision::numerator(r) << "/" << boost::multiprecision::denominator(r);
  return out.str();
}

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

BigInt parse_integer(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw Error("malformed rational '" + std::string(s) + "'");
  BigInt value{std::string(s)};
  return negative ? BigInt(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw Error("empty rational");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_integer(text.substr(0, slash));
    BigInt den = parse_integer(text.substr(slash + 1));
    if (den == 0) throw Error("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    bool negative = !whole.empty() && whole.front() == '-';
    if (!whole.empty() && (whole.front() == '-' || whole.front() == '+')) whole.remove_prefix(1);
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) || (whole.empty() && frac.empty())) {
      throw Error("malformed rational '" + std::string(text) + "'");
    }
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
    BigInt num = (whole.empty() ? BigInt(0) : BigInt(std::string(whole))) * scale + (frac.empty() ? BigInt(0) : BigInt(std::string(frac)));
    Rational r(num, scale);
    return negative ? Rational(-r) : r;
  }
  return Rational(parse_integer(text));
}

unsigned derivative_degree(const Exponents& exps) {
  unsigned d = 0;
  for (std::size_t j = 1; j < exps.size(); ++j) d += exps[j];
  return d;
}

unsigned max_derivative_order(const Exponents& exps) {
  for (std::size_t j = exps.size(); j-- > 1;) {
    if (exps[j] > 0) return static_cast<unsigned>(j);
  }
  return 0;
}

unsigned total_degree(const Exponents& exps) {
  unsigned d = 0;
  for (unsigned a : exps) d += a;
  return d;
}

bool graded_less(const Exponents& a, const Exponents& b) {
  unsigned da = total_degree(a);
  unsigned db = total_degree(b);
  if (da != db) return da < db;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::string render_exponents(const Exponents& exps) {
  std::string out;
  for (std::size_t j = 0; j < exps.size(); ++j) {
    if (exps[j] == 0) continue;
    if (!out.empty()) out += " * ";
    out += j == 0 ? std::string("k") : "k'{" + std::to_string(j) + "}";
    if (exps[j] > 1) out += "^" + std::to_string(exps[j]);
  }
  return out.empty() ? std::string("1") : out;
}

namespace {

struct GradedLess {
  bool operator()(const Exponents& a, const Exponents& b) const { return graded_less(a, b); }
};

using TermMap = std::map<Exponents, Rational, GradedLess>;

void trim(Exponents& exps) {
  while (!exps.empty() && exps.back() == 0) exps.pop_back();
}

std::vector<Monomial> flatten(TermMap& map) {
  std::vector<Monomial> out;
  out.reserve(map.size());
  for (auto& [exps, coeff] : map) {
    if (coeff != 0) out.push_back(Monomial{std::move(coeff), exps});
  }
  return out;
}

}  // namespace

DiffPoly DiffPoly::normalize(std::vector<Monomial> terms) {
  TermMap map;
  for (auto& t : terms) {
    trim(t.exps);
    auto [it, inserted] = map.try_emplace(std::move(t.exps), t.coeff);
    if (!inserted) it->second += t.coeff;
  }
  DiffPoly p;
  p.terms_ = flatten(map);
  return p;
}

DiffPoly DiffPoly::constant(const Rational& c) {
  return normalize({Monomial{c, {}}});
}

DiffPoly DiffPoly::derivative(unsigned order) {
  Exponents e(order + 1, 0);
  e[order] = 1;
  return normalize({Monomial{Rational(1), std::move(e)}});
}

std::size_t DiffPoly::jet_length() const {
  std::size_t n = 0;
  for (const auto& t : terms_) n = std::max(n, t.exps.size());
  return n;
}

unsigned DiffPoly::max_order() const {
  unsigned m = 0;
  for (const auto& t : terms_) m = std::max(m, max_derivative_order(t.exps));
  return m;
}

unsigned DiffPoly::max_total_degree() const {
  unsigned d = 0;
  for (const auto& t : terms_) d = std::max(d, total_degree(t.exps));
  return d;
}

Rational DiffPoly::coefficient(const Exponents& exps) const {
  Exponents key = exps;
  trim(key);
  for (const auto& t : terms_) {
    if (t.exps == key) return t.coeff;
  }
  return Rational(0);
}

DiffPoly DiffPoly::operator-() const {
  DiffPoly out = *this;
  for (auto& t : out.terms_) t.coeff = -t.coeff;
  return out;
}

DiffPoly operator+(const DiffPoly& a, const DiffPoly& b) {
  std::vector<Monomial> all(a.terms_);
  all.insert(all.end(), b.terms_.begin(), b.terms_.end());
  return DiffPoly::normalize(std::move(all));
}

DiffPoly operator-(const DiffPoly& a, const DiffPoly& b) { return a + (-b); }

DiffPoly operator*(const DiffPoly& a, const DiffPoly& b) {
  std::vector<Monomial> prod;
  prod.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& ta : a.terms_) {
    for (const auto& tb : b.terms_) {
      Exponents e(std::max(ta.exps.size(), tb.exps.size()), 0);
      for (std::size_t j = 0; j < ta.exps.size(); ++j) e[j] += ta.exps[j];
      for (std::size_t j = 0; j < tb.exps.size(); ++j) e[j] += tb.exps[j];
      prod.push_back(Monomial{ta.coeff * tb.coeff, std::move(e)});
    }
  }
  return DiffPoly::normalize(std::move(prod));
}

DiffPoly operator*(const Rational& s, const DiffPoly& p) {
  if (s == 0) return DiffPoly{};
  DiffPoly out = p;
  for (auto& t : out.terms_) t.coeff *= s;
  return out;
}

bool operator==(const DiffPoly& a, const DiffPoly& b) {
  if (a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (a.terms_[i].coeff != b.terms_[i].coeff || a.terms_[i].exps != b.terms_[i].exps) return false;
  }
  return true;
}

std::string DiffPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    std::ostringstream c;
    c << t.coeff;
    std::string coeff = c.str();
    if (i == 0) {
      out += coeff;
    } else if (!coeff.empty() && coeff.front() == '-') {
      out += " - " + coeff.substr(1);
    } else {
      out += " + " + coeff;
    }
    if (!t.exps.empty()) out += " * " + render_exponents(t.exps);
  }
  return out;
}

DiffPoly add(const DiffPoly& a, const DiffPoly& b) { return a + b; }
DiffPoly mul(const DiffPoly& a, const DiffPoly& b) { return a * b; }

DiffPoly d_theta(const DiffPoly& p) {
  std::vector<Monomial> out;
  for (const auto& t : p.terms()) {
    for (std::size_t j = 0; j < t.exps.size(); ++j) {
      if (t.exps[j] == 0) continue;
      Exponents e = t.exps;
      if (e.size() < j + 2) e.resize(j + 2, 0);
      e[j] -= 1;
      e[j + 1] += 1;
      out.push_back(Monomial{t.coeff * t.exps[j], std::move(e)});
    }
  }
  return DiffPoly::normalize(std::move(out));
}

DiffPoly d_s(const DiffPoly& p) { return DiffPoly::curvature() * d_theta(p); }

double eval_at(const DiffPoly& p, std::span<const double> jet) {
  if (jet.size() < p.jet_length()) throw Error("insufficient jet order");
  double sum = 0.0;
  for (const auto& t : p.terms()) {
    double v = to_double(t.coeff);
    for (std::size_t j = 0; j < t.exps.size(); ++j) v *= ipow(jet[j], t.exps[j]);
    sum += v;
  }
  return sum;
}

CompiledPoly::CompiledPoly(const DiffPoly& p) : jet_length_(p.jet_length()) {
  for (const auto& t : p.terms()) {
    Term term{to_double(t.coeff), factors_.size(), 0};
    for (std::size_t j = 0; j < t.exps.size(); ++j) {
      if (t.exps[j] == 0) continue;
      factors_.push_back(Factor{static_cast<unsigned>(j), t.exps[j]});
      ++term.count;
    }
    terms_.push_back(term);
  }
}

double CompiledPoly::operator()(const double* jet) const noexcept {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (std::size_t f = t.first; f < t.first + t.count; ++f) {
      v *= ipow(jet[factors_[f].order], factors_[f].power);
    }
    sum += v;
  }
  return sum;
}

}  // namespace curveflow
