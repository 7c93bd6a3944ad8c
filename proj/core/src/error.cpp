#include "memcl/error.hpp"

namespace memcl {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::empty_payload: return "EmptyPayload";
    case ErrorCode::empty_trajectory: return "EmptyTrajectory";
    case ErrorCode::empty_outcomes: return "EmptyOutcomes";
    case ErrorCode::undefined_subset: return "UndefinedSubset";
    case ErrorCode::too_few_items: return "TooFewItems";
    case ErrorCode::empty_log: return "EmptyLog";
    case ErrorCode::dangling_unit_id: return "DanglingUnitId";
    case ErrorCode::config_invalid: return "ConfigInvalid";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::validation_error: return "ValidationError";
    case ErrorCode::incomplete_artifacts: return "IncompleteArtifacts";
    case ErrorCode::artifact_corrupt: return "ArtifactCorrupt";
    case ErrorCode::adapter_unavailable: return "AdapterUnavailable";
    case ErrorCode::llm_parse_failure: return "ParseFailure";
    case ErrorCode::timeout: return "Timeout";
    case ErrorCode::http_error: return "HttpError";
    case ErrorCode::auth_error: return "AuthError";
  }
  return "Error";
}

}  // namespace memcl
