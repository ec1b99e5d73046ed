#pragma once

#include <stdexcept>

namespace cbf {

// Precondition violations: mismatched vector/matrix sizes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid problem or scenario configuration (non-positive counts, bad keys).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown (factorization failure, non-finite data).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Channel matrix without full column rank; zero-forcing is undefined.
class DegenerateChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cbf
