#pragma once

#include <stdexcept>
#include <string>

namespace ncmax {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (nonpositive t, empty interval, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Exponent window violates its ordering constraints.
class WindowError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An integral that must be finite diverges.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Operands live in different algebras or have mismatched shapes.
class AlgebraMismatch : public Error {
 public:
  using Error::Error;
};

/// Input operator fails a structural requirement (Hermitian, PSD, projection).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Missing or inconsistent configuration (no witness generator, bad JSON, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A verified inequality failed. Carries enough context to reproduce.
class CertificateViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace ncmax
