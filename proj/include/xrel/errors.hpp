#pragma once

#include <stdexcept>
#include <string>

namespace xrel {

// Argument or parameter outside its documented domain.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data: DFG files, plans, profiles, images.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system or stream failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xrel
