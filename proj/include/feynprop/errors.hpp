#pragma once

#include <stdexcept>
#include <string>

namespace feynprop {

// Operation called outside its mathematical domain (t <= t0 where a
// propagator needs forward time, a = 0 in a Gaussian integral, ...).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// An exponential overflowed. The message names the offending atom or
// (n, k) configuration.
class RangeError : public std::range_error {
  public:
    using std::range_error::range_error;
};

// Hard numerical failure: bound violation, boundary contamination,
// non-finite result.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Malformed or schema-violating run configuration.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace feynprop
