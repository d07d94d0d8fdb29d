#pragma once

#include <stdexcept>
#include <string>

namespace qspoof {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dense operator would exceed the configured dimension cap.
class DimensionCapExceeded : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions or factor layouts are inconsistent.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// The Hermitian eigensolver did not converge.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A scenario or run configuration violates one of its rules.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Too few usable points for a fit.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Every error value in a decay fit was exactly zero.
class AllErrorsZero : public Error {
 public:
  using Error::Error;
};

/// Malformed CSV or JSON input.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qspoof
