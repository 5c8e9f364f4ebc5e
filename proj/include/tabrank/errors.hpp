#pragma once

#include <stdexcept>
#include <string>

namespace tabrank {

// Base of every error the library throws. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KindError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : Error(what), row_(row) {}
  explicit ParseError(const std::string& what) : Error(what) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_ = 0;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ResampleError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// True for errors caused by bad user input or configuration rather than a
// failure while computing.
inline bool is_usage_error(const Error& e) {
  return dynamic_cast<const ConfigError*>(&e) != nullptr ||
         dynamic_cast<const SchemaError*>(&e) != nullptr ||
         dynamic_cast<const ValidationError*>(&e) != nullptr ||
         dynamic_cast<const ParseError*>(&e) != nullptr ||
         dynamic_cast<const BoundsError*>(&e) != nullptr;
}

}  // namespace tabrank
