#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace framekit {

enum class ErrorCode {
  // corpus-io
  kMissingExampleColumn,
  kMissingLabelColumn,
  kEmptyLabel,
  kEmptyCorpus,
  kMalformedRow,
  kDimensionMismatch,
  kRaggedSummaries,
  kNormalizationError,
  kEmptyInput,
  // textprep / lda
  kInvalidConfig,
  kEmptyVocabulary,
  kAllDocumentsEmpty,
  kKeywordCountExceedsVocabulary,
  kTermNotInVocabulary,
  // classifier
  kLabelTooSmall,
  kValidationFailed,
  kNonFiniteLoss,
  kBackendUnavailable,
  kCorruptModelFile,
  kDuplicateModelId,
  kUnknownModelId,
  // jobs
  kInvalidParams,
  kUnknownJob,
  kUnknownCorpus,
  kStoreCorrupt,
  kSinkUnavailable,
  kResultsNotReady,
  kResultsExpired,
  kIllegalTransition,
  kIoError,
};

// Stable snake_case identifier, used as the machine-readable `code` in API
// errors and in job error messages.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return error_code_name(code_); }

  // Offending input field, when the error is attributable to one.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace framekit
