#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace onset {

enum class ErrorKind {
  // signal-io
  MalformedFile,
  TooFewChannels,
  OverlappingEvents,
  OutOfRangeEvent,
  // features
  EmptySeries,
  DegenerateVariance,
  SeriesTooShort,
  ZeroNormalizer,
  // corpus
  WindowOutOfBounds,
  DuplicateIds,
  // forest
  EmptyMatrix,
  InconsistentWidth,
  DimensionMismatch,
  MalformedModelFile,
  VersionMismatch,
  // detector / evaluation
  SignalTooShort,
  NoTrueOnsets,
  // synth / config
  InvalidHurst,
  InvalidConfig,
  Io,
};

// Coarse grouping used for process exit codes.
enum class ErrorCategory { Validation, Io, Computation };

std::string_view to_string(ErrorKind kind) noexcept;
ErrorCategory category_of(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

// Re-throws `e` with additional leading context, keeping its kind.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

}  // namespace onset
