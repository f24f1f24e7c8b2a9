#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace datd {

enum class ErrorCode {
  empty_round,
  degenerate_weights,
  log_domain,
  no_tasks,
  unknown_entity,
  invalid_argument,
  no_sources,
  phase_violation,
  duplicate_commit,
  duplicate_reveal,
  no_commitment,
  unknown_node,
  round_failed,
  undefined_ratio,
  no_such_node,
  config_error,
};

/// Stable kebab-case name of an error code, e.g. "empty-round".
std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) +
                           (detail.empty() ? "" : ": " + detail)),
        code_(code) {}
  explicit Error(ErrorCode code) : Error(code, "") {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace datd
