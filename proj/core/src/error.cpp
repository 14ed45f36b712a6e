#include "framekit/error.hpp"

namespace framekit {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingExampleColumn: return "missing_example_column";
    case ErrorCode::kMissingLabelColumn: return "missing_label_column";
    case ErrorCode::kEmptyLabel: return "empty_label";
    case ErrorCode::kEmptyCorpus: return "empty_corpus";
    case ErrorCode::kMalformedRow: return "malformed_row";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kRaggedSummaries: return "ragged_summaries";
    case ErrorCode::kNormalizationError: return "normalization_error";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kEmptyVocabulary: return "empty_vocabulary";
    case ErrorCode::kAllDocumentsEmpty: return "all_documents_empty";
    case ErrorCode::kKeywordCountExceedsVocabulary: return "keyword_count_exceeds_vocabulary";
    case ErrorCode::kTermNotInVocabulary: return "term_not_in_vocabulary";
    case ErrorCode::kLabelTooSmall: return "label_too_small";
    case ErrorCode::kValidationFailed: return "validation_failed";
    case ErrorCode::kNonFiniteLoss: return "non_finite_loss";
    case ErrorCode::kBackendUnavailable: return "backend_unavailable";
    case ErrorCode::kCorruptModelFile: return "corrupt_model_file";
    case ErrorCode::kDuplicateModelId: return "duplicate_model_id";
    case ErrorCode::kUnknownModelId: return "unknown_model_id";
    case ErrorCode::kInvalidParams: return "invalid_params";
    case ErrorCode::kUnknownJob: return "unknown_job";
    case ErrorCode::kUnknownCorpus: return "unknown_corpus";
    case ErrorCode::kStoreCorrupt: return "store_corrupt";
    case ErrorCode::kSinkUnavailable: return "sink_unavailable";
    case ErrorCode::kResultsNotReady: return "results_not_ready";
    case ErrorCode::kResultsExpired: return "results_expired";
    case ErrorCode::kIllegalTransition: return "illegal_transition";
    case ErrorCode::kIoError: return "io_error";
  }
  return "unknown_error";
}

}  // namespace framekit
