#pragma once

#include <stdexcept>
#include <string>

namespace faraday {

/// Bad input: schema violations, out-of-domain arguments. CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A well-formed request the numerics cannot satisfy. CLI exit code 2.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File system and format problems. CLI exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace faraday
