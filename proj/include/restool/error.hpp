#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace restool {

/// Failure category. Each maps onto a distinct CLI exit status.
enum class ErrorKind { Config, Data, Numeric };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what, std::string field = {})
      : std::runtime_error(what), kind_(kind), field_(std::move(field)) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Dotted config path or file name the error refers to; may be empty.
  const std::string& field() const noexcept { return field_; }

private:
  ErrorKind kind_;
  std::string field_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : Error(ErrorKind::Config, what, std::move(field)) {}
};

class DataError : public Error {
public:
  explicit DataError(const std::string& what, std::string field = {})
      : Error(ErrorKind::Data, what, std::move(field)) {}
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string& what, std::string field = {})
      : Error(ErrorKind::Numeric, what, std::move(field)) {}
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Data: return "data";
    case ErrorKind::Numeric: return "numeric";
  }
  return "unknown";
}

} // namespace restool
