#pragma once

#include <string>
#include <vector>

#include "framekit/classifier.hpp"
#include "framekit/corpus.hpp"
#include "framekit/lda.hpp"

namespace framekit {

// `doc_id,dominant_topic,topic_0..topic_{K-1}` with 6-decimal theta.
// Throws Error(kDimensionMismatch) when the model's D differs from the corpus.
std::string write_doc_topic_csv(const lda::TopicModel& model, const Corpus& corpus);

// `topic_id,coherence,keyword_1..keyword_n`, rows in ascending topic_id.
// Throws Error(kEmptyInput) or Error(kRaggedSummaries).
std::string write_topic_keywords_csv(const std::vector<lda::TopicSummary>& summaries);

// `doc_id,predicted_label,p_<label>...` with labels in lexicographic order.
// The predicted label is recomputed as the arg max over those columns, so ties
// go to the lexicographically first label. Throws Error(kDimensionMismatch)
// or Error(kNormalizationError) when a row does not sum to 1 within 1e-6.
std::string write_predictions_csv(const std::vector<classifier::PredictionResult>& predictions,
                                  const std::vector<std::string>& labels);

// `num_topics,mean_coherence,perplexity`.
std::string write_sweep_csv(const std::vector<lda::SweepRow>& rows);

}  // namespace framekit
