#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace storygrid {

enum class ErrorCode {
  UnknownObject,
  OutOfBounds,
  InvalidResize,
  InvalidCell,
  SyntaxError,
  SchemaError,
  DuplicateId,
  TooManyChannels,
  DanglingLayoutRef,
  UnknownObjectInSnapshot,
  NonMonotonicTimestamp,
  UnknownPoster,
  UnknownSession,
  UnknownLayout,
  MalformedMessage,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; `code()` carries the
// category and `what()` a human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace storygrid
