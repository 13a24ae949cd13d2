#pragma once

#include <stdexcept>
#include <string>

namespace clipofdm {

// Block size, vector length or slot-layout mismatch.
class SizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid experiment description (config file or CLI overrides).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The message-passing recursion or a moment computation left the finite range.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace clipofdm
