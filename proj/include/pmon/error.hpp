#pragma once

#include <stdexcept>
#include <string>

namespace pmon {

/// Invalid mission, scenario, or optimizer configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was called with inputs that violate its contract.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Numerical failure (non-finite values, root localization failure).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pmon
