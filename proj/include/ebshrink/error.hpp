#pragma once

#include <stdexcept>
#include <string>

namespace ebshrink {

// Malformed or out-of-contract input (too few arms, negative variance, bad
// file rows).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A quantity is mathematically undefined for the given data, e.g. the full
// variance with K <= 3 under the K - 3 convention.
class NumericalDegeneracy : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace ebshrink
