#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace similo {

enum class ErrorCode {
  kEmptySnapshot,
  kOracleNotFound,
  kMalformedValue,
  kPromptTooLarge,
  kUnparsableAnswer,
  kUnknownWidgetId,
  kRateLimited,
  kTransportError,
  kReplayMiss,
  kParseError,
  kDuplicatePairId,
  kMissingPhase1Results,
  kMismatchedCorpora,
  kConfigError,
  kMissingApiKey,
};

// Stable name used in CLI messages, reports and logs ("ReplayMiss", ...).
std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const { return code_; }
  std::string_view name() const { return error_name(code_); }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace similo
