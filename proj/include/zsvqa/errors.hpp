#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zsvqa {

// Root of every error raised by the library. Each subclass corresponds to one
// failure category so callers (and the CLI) can react per category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Raised when an operation is asked to consume data produced in an
// incompatible mode (e.g. signed relevance scores fed to the sampler).
class ModeError : public Error {
 public:
  using Error::Error;
};

class ClassificationError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, std::size_t required_tokens, std::size_t budget_tokens)
      : Error(what), required_(required_tokens), budget_(budget_tokens) {}

  std::size_t required_tokens() const noexcept { return required_; }
  std::size_t budget_tokens() const noexcept { return budget_; }

 private:
  std::size_t required_;
  std::size_t budget_;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class NetworkError : public BackendError {
 public:
  using BackendError::BackendError;
};

class MalformedResponseError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace zsvqa
