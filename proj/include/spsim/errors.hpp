#pragma once

#include <stdexcept>
#include <string>

namespace spsim {

// Bad input: violated precondition, malformed file or config. CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Integrator or fit failure on otherwise valid input. CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace spsim
