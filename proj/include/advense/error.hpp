#pragma once

#include <stdexcept>
#include <string>

namespace advense {

// Bad data handed to an operation: mismatched lengths, non-finite scores,
// rank vectors that are not permutations, degenerate inputs.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration: parameter outside its documented range, colliding
// cluster boundaries, unknown scheme names.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace advense
