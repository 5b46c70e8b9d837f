#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace modconf {

// Machine-readable error classes. Each maps to a stable string (see to_string)
// and, at the CLI boundary, to a process exit code.
enum class ErrorCode {
  kInvalidName,
  kInvalidArgument,
  kPrecondition,
  // gateway
  kTransportExhausted,
  kAuthFailure,
  kProviderRefusal,
  kMissingFixtureEntry,
  // synthesis
  kNoQuestionsForImage,
  kComponentParseFailure,
  kNoSubstitutableComponents,
  kSubstitutionFailure,
  kAnswerFailure,
  kVerificationFailed,
  // evaluation
  kUnparseableVerdict,
  kUnparseableRating,
  kOutOfRangeRating,
  kUnresolvedRecord,
  // dataset
  kDuplicateId,
  kParseError,
  kIoError,
  kSchemaError,
  // review
  kNotFound,
  kConflict,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return to_string(code_); }

 private:
  ErrorCode code_;
};

// Raised by dataset loading; carries the 1-based line number of the failure.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kParseError,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace modconf
