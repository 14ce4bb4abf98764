#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace wordcraft {

using json = nlohmann::json;

/// Stable error codes shared by every module. The HTTP layer maps each one to
/// a status through the registry in error.cpp; keep `kCount` last.
enum class ErrorCode {
  kParseError,
  kDuplicateWordId,
  kMissingResponse,
  kUnknownWord,
  kUnknownSense,
  kUnknownSession,
  kSessionClosed,
  kUnknownKeyword,
  kOverlapError,
  kRangeError,
  kPaletteExhausted,
  kDepthExceeded,
  kDuplicateConcept,
  kUnknownAnchor,
  kUnknownSegment,
  kUnknownCard,
  kUnknownNode,
  kSelfLink,
  kUnknownLink,
  kEmptyNote,
  kTextTooLong,
  kUnknownConceptTag,
  kBadBBox,
  kUnknownElement,
  kUnknownRelation,
  kRecallPathIncomplete,
  kUnknownStyle,
  kNoImage,
  kJobPending,
  kUnknownJob,
  kUnknownWordCard,
  kInvalidArgument,
  kProviderError,
  kFormatError,
  kTimeoutError,
  kContentPolicyRejection,
  kScriptExhausted,
  kMissingVariable,
  kUnknownTemplate,
  kTemplateError,
  kConfigError,
  kPortInUse,
  kUnauthorized,
  kNotFound,
  kBadRequest,
  kInternalError,
  kCount
};

struct ErrorInfo {
  ErrorCode code;
  std::string_view name;
  int http_status;
};

/// Registry lookup. Every ErrorCode below kCount has exactly one entry.
const ErrorInfo& error_info(ErrorCode code);
std::string_view error_name(ErrorCode code);
int http_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, json details = json::object())
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const json& details() const noexcept { return details_; }

  /// {"code", "message", "details"} as sent over the wire.
  json to_json() const;

 private:
  ErrorCode code_;
  json details_;
};

}  // namespace wordcraft
