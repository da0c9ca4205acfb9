#pragma once

#include <stdexcept>
#include <string>

namespace somqe {

// Exception categories map one-to-one onto CLI exit codes:
// input/validation -> 1, I/O and decode -> 2, invariant -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class BoundsError : public InputError {
 public:
  using InputError::InputError;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public IoError {
 public:
  using IoError::IoError;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace somqe
