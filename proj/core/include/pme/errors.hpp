#pragma once

#include <stdexcept>
#include <string>

namespace pme {

/// Input data violates a format rule or a domain invariant.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed arguments outside an operation's preconditions.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace pme
