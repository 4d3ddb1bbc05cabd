#pragma once

#include <stdexcept>
#include <string>

namespace starcode {

/// Categories used by the CLI when it emits a machine-readable error record.
enum class ErrorKind {
  Dimension,
  InvalidState,
  InvalidArgument,
  Config,
  Solver,
  Optimizer,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::InvalidState: return "invalid_state";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Config: return "config";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Optimizer: return "optimizer";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorKind::Dimension, what) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error(ErrorKind::InvalidState, what) {}
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

/// Config failures carry the offending field path, e.g. "noise.t1_ge_1".
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(ErrorKind::Config, field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class SolverError : public Error {
 public:
  SolverError(double time, const std::string& what)
      : Error(ErrorKind::Solver, what + " (t = " + std::to_string(time) + " us)"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class OptimizerError : public Error {
 public:
  explicit OptimizerError(const std::string& what) : Error(ErrorKind::Optimizer, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace starcode
