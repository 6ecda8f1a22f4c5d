#pragma once

#include <stdexcept>
#include <string>

namespace smf {

/// A vertex sequence that is not a simple path in the instance.
class invalid_path : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A bound or formula queried outside the range where it is valid.
class range_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Exact computations refused because they would exceed a resource guard.
class resource_limit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal algorithm invariant failed. Reaching this is a bug.
class invariant_violation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace smf
