#pragma once

#include <stdexcept>
#include <string>

namespace broker {

/// Malformed distributions, instances, profiles or files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An enumeration or LP would exceed its configured size guard.
class SizeGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solver reached a state that valid inputs cannot produce.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace broker
