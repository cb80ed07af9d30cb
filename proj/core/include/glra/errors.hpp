#pragma once

#include <stdexcept>
#include <string>

namespace glra {

/// Malformed or incompatible input: bad shapes, non-finite entries, parse failures.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input is well-formed but outside the mathematical domain of the operation
/// (e.g. an indefinite matrix passed to a PSD square root).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace glra
