#include "conflictlens/error.hpp"

namespace conflictlens {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidItemCount: return "invalid_item_count";
    case ErrorCode::ItemOutOfRange: return "item_out_of_range";
    case ErrorCode::IndexOutOfBounds: return "index_out_of_bounds";
    case ErrorCode::ExtractionFailed: return "extraction_failed";
    case ErrorCode::EmptyTranscript: return "empty_transcript";
    case ErrorCode::UnsupportedImage: return "unsupported_image";
    case ErrorCode::EstimationFailed: return "estimation_failed";
    case ErrorCode::GenerationFailed: return "generation_failed";
    case ErrorCode::InvalidStylePair: return "invalid_style_pair";
    case ErrorCode::RewriteUnavailable: return "rewrite_unavailable";
    case ErrorCode::SimulationFailed: return "simulation_failed";
    case ErrorCode::BranchEnded: return "branch_ended";
    case ErrorCode::InvalidResetPoint: return "invalid_reset_point";
    case ErrorCode::TurnOutOfRange: return "turn_out_of_range";
    case ErrorCode::StageClosed: return "stage_closed";
    case ErrorCode::IncompleteAnnotation: return "incomplete_annotation";
    case ErrorCode::SchemaValidationFailed: return "schema_validation_failed";
    case ErrorCode::TransportFailed: return "transport_failed";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::UnknownTemplate: return "unknown_template";
    case ErrorCode::MissingBinding: return "missing_binding";
    case ErrorCode::IllegalTransition: return "illegal_transition";
    case ErrorCode::SessionNotFound: return "session_not_found";
    case ErrorCode::InvalidInput: return "invalid_input";
    case ErrorCode::ConfigError: return "config_error";
    case ErrorCode::StorageError: return "storage_error";
  }
  return "unknown";
}

}  // namespace conflictlens
