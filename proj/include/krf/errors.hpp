#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace krf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration (out-of-range settings, malformed config files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A function argument is outside its domain (dimension mismatch, zero vector).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A tensor or form failed one of its structural invariants.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// The curvature hypothesis H <= -kappa with kappa > 0 is not met.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// A metric eigenvalue became nonpositive: the state left the Kahler cone.
class PositivityError : public Error {
 public:
  PositivityError(const std::string& what, std::ptrdiff_t node, double s)
      : Error(what), node_(node), s_(s) {}

  std::ptrdiff_t node() const { return node_; }
  double s() const { return s_; }

 private:
  std::ptrdiff_t node_;
  double s_;
};

/// NaN or infinity detected in the evolving state.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace krf
