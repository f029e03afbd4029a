#pragma once

#include <stdexcept>
#include <string>

namespace snd {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter violates its documented contract (negative sigma, B < 1, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// The oracle's query budget does not allow the requested query.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Binary search endpoints carry the same observed label.
class BracketError : public Error {
 public:
  using Error::Error;
};

// No misclassified starting point was found for a decision attack.
class InitFailure : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

// Loss became non-finite during training.
class TrainingError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace snd
