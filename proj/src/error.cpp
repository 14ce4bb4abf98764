#include "wordcraft/error.hpp"

#include <array>

namespace wordcraft {

namespace {

constexpr std::array<ErrorInfo, static_cast<size_t>(ErrorCode::kCount)> kRegistry{{
    {ErrorCode::kParseError, "PARSE_ERROR", 400},
    {ErrorCode::kDuplicateWordId, "DUPLICATE_WORD_ID", 400},
    {ErrorCode::kMissingResponse, "MISSING_RESPONSE", 422},
    {ErrorCode::kUnknownWord, "UNKNOWN_WORD", 404},
    {ErrorCode::kUnknownSense, "UNKNOWN_SENSE", 404},
    {ErrorCode::kUnknownSession, "UNKNOWN_SESSION", 404},
    {ErrorCode::kSessionClosed, "SESSION_CLOSED", 409},
    {ErrorCode::kUnknownKeyword, "UNKNOWN_KEYWORD", 404},
    {ErrorCode::kOverlapError, "OVERLAP_ERROR", 422},
    {ErrorCode::kRangeError, "RANGE_ERROR", 422},
    {ErrorCode::kPaletteExhausted, "PALETTE_EXHAUSTED", 422},
    {ErrorCode::kDepthExceeded, "DEPTH_EXCEEDED", 422},
    {ErrorCode::kDuplicateConcept, "DUPLICATE_CONCEPT", 409},
    {ErrorCode::kUnknownAnchor, "UNKNOWN_ANCHOR", 404},
    {ErrorCode::kUnknownSegment, "UNKNOWN_SEGMENT", 404},
    {ErrorCode::kUnknownCard, "UNKNOWN_CARD", 404},
    {ErrorCode::kUnknownNode, "UNKNOWN_NODE", 404},
    {ErrorCode::kSelfLink, "SELF_LINK", 422},
    {ErrorCode::kUnknownLink, "UNKNOWN_LINK", 404},
    {ErrorCode::kEmptyNote, "EMPTY_NOTE", 422},
    {ErrorCode::kTextTooLong, "TEXT_TOO_LONG", 422},
    {ErrorCode::kUnknownConceptTag, "UNKNOWN_CONCEPT_TAG", 422},
    {ErrorCode::kBadBBox, "BAD_BBOX", 422},
    {ErrorCode::kUnknownElement, "UNKNOWN_ELEMENT", 404},
    {ErrorCode::kUnknownRelation, "UNKNOWN_RELATION", 404},
    {ErrorCode::kRecallPathIncomplete, "RECALL_PATH_INCOMPLETE", 409},
    {ErrorCode::kUnknownStyle, "UNKNOWN_STYLE", 422},
    {ErrorCode::kNoImage, "NO_IMAGE", 409},
    {ErrorCode::kJobPending, "JOB_PENDING", 409},
    {ErrorCode::kUnknownJob, "UNKNOWN_JOB", 404},
    {ErrorCode::kUnknownWordCard, "UNKNOWN_WORD_CARD", 404},
    {ErrorCode::kInvalidArgument, "INVALID_ARGUMENT", 400},
    {ErrorCode::kProviderError, "PROVIDER_ERROR", 502},
    {ErrorCode::kFormatError, "FORMAT_ERROR", 502},
    {ErrorCode::kTimeoutError, "TIMEOUT_ERROR", 504},
    {ErrorCode::kContentPolicyRejection, "CONTENT_POLICY_REJECTION", 422},
    {ErrorCode::kScriptExhausted, "SCRIPT_EXHAUSTED", 500},
    {ErrorCode::kMissingVariable, "MISSING_VARIABLE", 500},
    {ErrorCode::kUnknownTemplate, "UNKNOWN_TEMPLATE", 500},
    {ErrorCode::kTemplateError, "TEMPLATE_ERROR", 500},
    {ErrorCode::kConfigError, "CONFIG_ERROR", 500},
    {ErrorCode::kPortInUse, "PORT_IN_USE", 500},
    {ErrorCode::kUnauthorized, "UNAUTHORIZED", 401},
    {ErrorCode::kNotFound, "NOT_FOUND", 404},
    {ErrorCode::kBadRequest, "BAD_REQUEST", 400},
    {ErrorCode::kInternalError, "INTERNAL_ERROR", 500},
}};

constexpr bool registry_is_ordered() {
  for (size_t i = 0; i < kRegistry.size(); ++i) {
    if (static_cast<size_t>(kRegistry[i].code) != i) return false;
  }
  return true;
}
static_assert(registry_is_ordered(), "error registry must follow ErrorCode order");

}  // namespace

const ErrorInfo& error_info(ErrorCode code) {
  auto idx = static_cast<size_t>(code);
  if (idx >= kRegistry.size()) throw std::out_of_range("unregistered error code");
  return kRegistry[idx];
}

std::string_view error_name(ErrorCode code) { return error_info(code).name; }

int http_status(ErrorCode code) { return error_info(code).http_status; }

json Error::to_json() const {
  return json{{"code", std::string(error_name(code_))}, {"message", what()}, {"details", details_}};
}

}  // namespace wordcraft
