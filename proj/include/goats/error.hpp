#pragma once

#include <stdexcept>
#include <string>

namespace goats {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  OutOfRange,
  Config,
  Io,
  Version,
  Numerical,
  EmptyBuffer,
  IncompleteEpisode,
};

const char* to_string(ErrorCode code) noexcept;

// Every recoverable failure in the library is reported as an Error carrying a
// code the C API can map onto a status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace goats
