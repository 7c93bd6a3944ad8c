#pragma once

#include <stdexcept>
#include <string>

namespace memcl {

enum class ErrorCode {
  empty_payload,
  empty_trajectory,
  empty_outcomes,
  undefined_subset,
  too_few_items,
  empty_log,
  dangling_unit_id,
  config_invalid,
  parse_error,
  validation_error,
  incomplete_artifacts,
  artifact_corrupt,
  adapter_unavailable,
  llm_parse_failure,
  timeout,
  http_error,
  auth_error,
};

const char* to_string(ErrorCode code);

// Every recoverable failure in the library surfaces as this exception; the
// code lets callers (and the CLI exit path) branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace memcl
