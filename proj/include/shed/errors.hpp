#pragma once

#include <stdexcept>
#include <string>

namespace shed {

/// Invalid configuration, dimensions or parameter ranges. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values observed where the run cannot continue. Maps to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shed
