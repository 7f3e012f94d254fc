#pragma once

#include <stdexcept>
#include <string>

namespace stdgr {

// Caller passed arguments that violate an operation's preconditions.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data (CSV rows, model files, non-finite entries).
class DataFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hyperparameters that break a solver invariant (e.g. step sizes).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A transition tensor that does not define a stationary process.
class UnstableModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stdgr
