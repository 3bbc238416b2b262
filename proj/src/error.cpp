#include "onset/error.hpp"

namespace onset {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedFile: return "MalformedFile";
    case ErrorKind::TooFewChannels: return "TooFewChannels";
    case ErrorKind::OverlappingEvents: return "OverlappingEvents";
    case ErrorKind::OutOfRangeEvent: return "OutOfRangeEvent";
    case ErrorKind::EmptySeries: return "EmptySeries";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::ZeroNormalizer: return "ZeroNormalizer";
    case ErrorKind::WindowOutOfBounds: return "WindowOutOfBounds";
    case ErrorKind::DuplicateIds: return "DuplicateIds";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::InconsistentWidth: return "InconsistentWidth";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::MalformedModelFile: return "MalformedModelFile";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::SignalTooShort: return "SignalTooShort";
    case ErrorKind::NoTrueOnsets: return "NoTrueOnsets";
    case ErrorKind::InvalidHurst: return "InvalidHurst";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Io:
      return ErrorCategory::Io;
    case ErrorKind::DegenerateVariance:
    case ErrorKind::ZeroNormalizer:
    case ErrorKind::EmptyMatrix:
    case ErrorKind::NoTrueOnsets:
      return ErrorCategory::Computation;
    default:
      return ErrorCategory::Validation;
  }
}

void rethrow_with_context(const Error& e, const std::string& context) {
  // what() already carries the kind prefix; strip it so it is not repeated.
  std::string msg = e.what();
  const std::string prefix = std::string(to_string(e.kind())) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  throw Error(e.kind(), context + ": " + msg);
}

}  // namespace onset
