#pragma once

#include <stdexcept>
#include <string>

namespace dpcg {

/// Malformed or inconsistent input (bad sizes, non-finite samples, schema errors).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A formula evaluated outside the set where it is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A multifunction produced an empty interval (lower > upper).
class CertificateViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dpcg
