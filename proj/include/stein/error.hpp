#pragma once

#include <stdexcept>
#include <string>

namespace stein {

// Argument outside the domain of a model, statistic or objective.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation is not defined for the given model (e.g. backward scores on an
// infinite support).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Sample carries too little information for the procedure (zero mean, zero
// variance, ...).
class DegenerateSample : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid procedure configuration (bootstrap size, optimizer settings, CLI
// options).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data; carries the offending line when known.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, long line = -1)
      : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}

  long line() const noexcept { return line_; }

 private:
  long line_;
};

// Objective is not finite anywhere near the starting point.
class StartError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stein
