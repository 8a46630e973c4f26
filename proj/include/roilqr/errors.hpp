#pragma once

#include <stdexcept>
#include <string>

namespace roilqr {

/// Invalid configuration or inconsistent problem setup.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Any failure of the numerics (divergence, rank deficiency, indefinite
/// Hessians, ...). Maps to a distinct CLI exit code.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An explicit step produced non-finite values.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, int step, int rollout = -1)
      : NumericalError(what), step_(step), rollout_(rollout) {}

  int step() const { return step_; }
  int rollout() const { return rollout_; }

 private:
  int step_;
  int rollout_;
};

class DegenerateInputError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficiencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IndefiniteError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace roilqr
