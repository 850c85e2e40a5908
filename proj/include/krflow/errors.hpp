#pragma once

#include <stdexcept>
#include <string>

namespace krf {

/// Base of every numerical failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The metric left the normalized Kähler class (volume differs from 4π).
class VolumeMismatch : public Error {
 public:
  using Error::Error;
};

class NormalizationFail : public Error {
 public:
  using Error::Error;
};

/// Eigensolver did not converge or its residual exceeded tolerance.
class SolveFail : public Error {
 public:
  using Error::Error;
};

/// The holomorphic band at 1 could not be isolated; refine the grid.
class BandAmbiguity : public Error {
 public:
  using Error::Error;
};

class StepReject : public Error {
 public:
  using Error::Error;
};

/// Two eigenvalues of a tracked branch came too close to tell apart.
class BranchCrossing : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment configuration; carries the offending line when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace krf
