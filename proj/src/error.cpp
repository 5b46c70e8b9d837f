#include "modconf/error.hpp"

namespace modconf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidName: return "invalid-name";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kTransportExhausted: return "transport-exhausted";
    case ErrorCode::kAuthFailure: return "auth-failure";
    case ErrorCode::kProviderRefusal: return "provider-refusal";
    case ErrorCode::kMissingFixtureEntry: return "missing-fixture-entry";
    case ErrorCode::kNoQuestionsForImage: return "no-questions-for-image";
    case ErrorCode::kComponentParseFailure: return "component-parse-failure";
    case ErrorCode::kNoSubstitutableComponents: return "no-substitutable-components";
    case ErrorCode::kSubstitutionFailure: return "substitution-failure";
    case ErrorCode::kAnswerFailure: return "answer-failure";
    case ErrorCode::kVerificationFailed: return "verification-failed";
    case ErrorCode::kUnparseableVerdict: return "unparseable-verdict";
    case ErrorCode::kUnparseableRating: return "unparseable-rating";
    case ErrorCode::kOutOfRangeRating: return "out-of-range-rating";
    case ErrorCode::kUnresolvedRecord: return "unresolved-record";
    case ErrorCode::kDuplicateId: return "duplicate-id";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kIoError: return "io-error";
    case ErrorCode::kSchemaError: return "schema-error";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kConflict: return "conflict";
  }
  return "unknown";
}

}  // namespace modconf
