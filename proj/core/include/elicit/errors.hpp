#pragma once

#include <stdexcept>
#include <string>

namespace elicit {

/// Invalid arguments, malformed configuration, violated preconditions.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// File system and parsing failures. Parse errors carry the line number.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown without a usable fallback (non-finite iterates).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace elicit
