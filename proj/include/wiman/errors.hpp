#pragma once

#include <stdexcept>
#include <string>

namespace wiman {

// A mathematical precondition failed (radius outside an iterated-log domain,
// inadequate truncation, ...). The CLI maps these to exit status 1.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised by operations that need at least one stored coefficient.
class ZeroSeriesError : public DomainError {
 public:
  ZeroSeriesError() : DomainError("zero series") {}
};

// Malformed input: bad manifest, bad flag value, unparsable series file.
// The CLI maps these to exit status 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace wiman
