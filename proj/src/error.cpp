#include "goats/error.hpp"

namespace goats {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::OutOfRange: return "out of range";
    case ErrorCode::Config: return "configuration error";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Version: return "version mismatch";
    case ErrorCode::Numerical: return "numerical error";
    case ErrorCode::EmptyBuffer: return "empty buffer";
    case ErrorCode::IncompleteEpisode: return "incomplete episode";
  }
  return "unknown error";
}

}  // namespace goats
