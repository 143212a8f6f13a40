#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robust_mspca {

enum class ErrorKind {
  InvalidMatrix,
  InvalidRank,
  InvalidArgument,
  ShapeError,
  IoError,
  ParseError,
  DegenerateInstance,
  NumericalError,
};

constexpr std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::InvalidRank: return "InvalidRank";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DegenerateInstance: return "DegenerateInstance";
    case ErrorKind::NumericalError: return "NumericalError";
  }
  return "Error";
}

/// Library error. what() carries the context, kind() the category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace robust_mspca
