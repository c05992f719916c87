#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace varic {

// Precondition or input-validation failure.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InvalidArgument {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : InvalidArgument(what + " at byte " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace varic
