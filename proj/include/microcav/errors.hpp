#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace microcav {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument for a mathematical operation (negative epsilon, k = 0, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration (too few elements, grid too coarse, malformed window).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Two grids or field dumps that must share an evaluation mesh do not.
class MeshMismatchError : public Error {
public:
  using Error::Error;
};

/// A field with no nonzero amplitude cannot be normalized.
class DegenerateFieldError : public DomainError {
public:
  using DomainError::DomainError;
};

/// P(x_j) > 0 where Q(x_j) = 0; the relative entropy is +infinity.
class InfiniteDivergenceError : public DomainError {
public:
  InfiniteDivergenceError(std::size_t cell, const std::string& what)
      : DomainError(what), cell_(cell) {}
  std::size_t cell() const noexcept { return cell_; }

private:
  std::size_t cell_;
};

/// Root iteration or level continuation failed.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// A tracked level was lost or could not be assigned unambiguously.
class TrackingError : public ConvergenceError {
public:
  TrackingError(double failed_epsilon, double last_good_epsilon, const std::string& what)
      : ConvergenceError(what), failed_(failed_epsilon), last_good_(last_good_epsilon) {}
  double failed_epsilon() const noexcept { return failed_; }
  double last_good_epsilon() const noexcept { return last_good_; }

private:
  double failed_;
  double last_good_;
};

/// Neither the strong nor the weak trajectory pattern is present.
class IndeterminateRegimeError : public Error {
public:
  using Error::Error;
};

}  // namespace microcav
