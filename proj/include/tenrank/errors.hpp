#pragma once

#include <stdexcept>
#include <string>

namespace tenrank {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (bad shape, mismatched fields, ...).
class argument_error : public error {
 public:
  using error::error;
};

/// An enumeration guard or point budget would be exceeded. Never approximated.
class guard_error : public error {
 public:
  using error::error;
};

/// A certificate or construction failed its exact re-check.
class verification_error : public error {
 public:
  using error::error;
};

/// Malformed tensor/subspace input.
class parse_error : public error {
 public:
  using error::error;
};

}  // namespace tenrank
