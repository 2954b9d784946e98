#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace conflictlens {

// Stable error codes. The snake_case spelling returned by to_string() is part
// of the HTTP problem-detail contract and must not change once shipped.
enum class ErrorCode {
  // conflict model
  InvalidItemCount,
  ItemOutOfRange,
  IndexOutOfBounds,
  // ingestion
  ExtractionFailed,
  EmptyTranscript,
  UnsupportedImage,
  EstimationFailed,
  // dialogue
  GenerationFailed,
  InvalidStylePair,
  RewriteUnavailable,
  SimulationFailed,
  BranchEnded,
  InvalidResetPoint,
  // annotation
  TurnOutOfRange,
  StageClosed,
  IncompleteAnnotation,
  // gateway
  SchemaValidationFailed,
  TransportFailed,
  Timeout,
  UnknownTemplate,
  MissingBinding,
  // service
  IllegalTransition,
  SessionNotFound,
  InvalidInput,
  ConfigError,
  StorageError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace conflictlens
