#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tads {

// Operand shapes or types do not line up (eval arity, composition typing, ...).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed serialized input: bad JSON, ragged rows, dangling ids, cycles.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on the values (not the shapes) of an argument failed.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::string dims_message(const char* what, std::size_t expected,
                                std::size_t actual) {
  return std::string(what) + ": expected dimension " +
         std::to_string(expected) + ", got " + std::to_string(actual);
}

}  // namespace tads
