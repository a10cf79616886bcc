#include "similo/error.hpp"

namespace similo {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptySnapshot: return "EmptySnapshot";
    case ErrorCode::kOracleNotFound: return "OracleNotFound";
    case ErrorCode::kMalformedValue: return "MalformedValue";
    case ErrorCode::kPromptTooLarge: return "PromptTooLarge";
    case ErrorCode::kUnparsableAnswer: return "UnparsableAnswer";
    case ErrorCode::kUnknownWidgetId: return "UnknownWidgetId";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kTransportError: return "TransportError";
    case ErrorCode::kReplayMiss: return "ReplayMiss";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicatePairId: return "DuplicatePairId";
    case ErrorCode::kMissingPhase1Results: return "MissingPhase1Results";
    case ErrorCode::kMismatchedCorpora: return "MismatchedCorpora";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kMissingApiKey: return "MissingApiKey";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code), detail_(detail) {}

}  // namespace similo
