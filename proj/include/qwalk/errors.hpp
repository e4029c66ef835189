#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

// Error taxonomy. The CLI maps these onto exit codes: ConfigError -> 2,
// NumericError and its subclasses -> 3, IoError -> 4.

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

class DomainError : public ConfigError {
 public:
  explicit DomainError(const std::string& what) : ConfigError(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Population leaked into the top guard band of the truncated Fock space.
class TruncationError : public NumericError {
 public:
  TruncationError(const std::string& what, double guard_population)
      : NumericError(what), guard_population_(guard_population) {}
  double guard_population() const noexcept { return guard_population_; }

 private:
  double guard_population_;
};

/// Sampling grid does not cover the support of a distribution.
class CoverageError : public NumericError {
 public:
  explicit CoverageError(const std::string& what) : NumericError(what) {}
};

class ConvergenceError : public NumericError {
 public:
  explicit ConvergenceError(const std::string& what) : NumericError(what) {}
};

/// Signal too short or too coarse to separate the requested tones.
class ResolvabilityError : public NumericError {
 public:
  explicit ResolvabilityError(const std::string& what) : NumericError(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qwalk
