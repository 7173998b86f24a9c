#pragma once

#include <stdexcept>
#include <string>

namespace curveflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed flow source text.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// The compiled PDE is not of the structured form the stability theory covers.
class ClassificationError : public Error {
 public:
  using Error::Error;
};

/// Stability hypotheses fail: unstable spectrum, refused structure, or rough data.
class CertificationError : public Error {
 public:
  using Error::Error;
};

/// A runtime monitor tripped during time integration (positivity, trapping).
class MonitorBreach : public Error {
 public:
  using Error::Error;
};

}  // namespace curveflow
