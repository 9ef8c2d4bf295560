#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scopesim {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid value passed to a numeric routine (non-finite input, bad parameter,
/// degenerate reference, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inertia matrix became (near-)singular during a dynamics evaluation.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// A derivative evaluation produced a non-finite value at time `t`.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double t) : Error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

/// The simulated state left the finite domain; carries the step index so
/// callers (in particular the GA fitness) can rank earlier blow-ups as worse.
class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Experiment config file rejected; carries the 1-based line number when the
/// offending line is known (0 otherwise).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::size_t line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Filesystem-level failure while reading or writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace scopesim
