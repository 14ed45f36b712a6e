#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "framekit/matrix.hpp"
#include "framekit/rng.hpp"
#include "framekit/textprep.hpp"

namespace framekit::lda {

using textprep::TokenizedCorpus;

struct LdaConfig {
  int num_topics = 2;
  std::uint64_t seed = 42;
  int iterations = 1000;
  // Symmetric document-topic prior; 50/K when unset.
  std::optional<double> alpha;
  double beta = 0.01;
  int keyword_count = 10;

  double effective_alpha() const {
    return alpha.value_or(50.0 / static_cast<double>(num_topics));
  }
  // Throws Error(kInvalidConfig) naming the field.
  void validate() const;

  friend bool operator==(const LdaConfig&, const LdaConfig&) = default;
};

// The corpus log-likelihood is checkpointed after initialization (iteration
// 0), every kLikelihoodInterval iterations, and after the final iteration.
inline constexpr int kLikelihoodInterval = 50;

struct LikelihoodCheckpoint {
  int iteration = 0;
  double log_likelihood = 0.0;

  friend bool operator==(const LikelihoodCheckpoint&, const LikelihoodCheckpoint&) = default;
};

struct TopicModel {
  LdaConfig config;
  std::vector<std::string> terms;
  std::string vocabulary_hash;

  Matrix<double> phi;    // K x V, rows sum to 1
  Matrix<double> theta;  // D x K, rows sum to 1
  Matrix<std::int32_t> topic_word_counts;  // K x V
  Matrix<std::int32_t> doc_topic_counts;   // D x K
  // Final sampler state: topic of every token, in document/position order.
  std::vector<std::vector<std::int32_t>> assignments;
  std::vector<std::size_t> empty_doc_ids;
  std::vector<LikelihoodCheckpoint> log_likelihood_trace;

  std::size_t num_topics() const { return phi.rows(); }
  std::size_t vocab_size() const { return phi.cols(); }
  std::size_t num_docs() const { return theta.rows(); }

  // Highest-weight topic for document d; ties go to the lowest index.
  std::size_t dominant_topic(std::size_t d) const;

  friend bool operator==(const TopicModel&, const TopicModel&) = default;
};

// Collapsed Gibbs sampler over a tokenized corpus. Topic assignments are
// initialized uniformly at random; each sweep visits documents in id order
// and tokens in position order, resampling every token from
//   p(z) ∝ (n_dz + alpha) (n_zw + beta) / (n_z + V beta).
class GibbsSampler {
 public:
  GibbsSampler(const TokenizedCorpus& corpus, const LdaConfig& config);

  void sweep();

  int iterations_done() const { return iterations_done_; }

  // log p(w, z) of the current state with phi and theta integrated out.
  double log_likelihood() const;

  const Matrix<std::int32_t>& topic_word_counts() const { return topic_word_; }
  const Matrix<std::int32_t>& doc_topic_counts() const { return doc_topic_; }
  const std::vector<std::int64_t>& topic_counts() const { return topic_totals_; }
  const std::vector<std::vector<std::int32_t>>& assignments() const { return z_; }

  // Point estimates from the current counts.
  TopicModel snapshot(std::vector<LikelihoodCheckpoint> trace) const;

 private:
  const TokenizedCorpus& corpus_;
  LdaConfig config_;
  std::size_t num_topics_;
  std::size_t vocab_size_;
  double alpha_;
  double beta_;
  Xoshiro256 rng_;
  Matrix<std::int32_t> topic_word_;
  Matrix<std::int32_t> doc_topic_;
  std::vector<std::int64_t> topic_totals_;
  std::vector<std::vector<std::int32_t>> z_;
  std::vector<double> weights_;
  int iterations_done_ = 0;
};

TopicModel train_lda(const TokenizedCorpus& corpus, const LdaConfig& config);

struct TopicSummary {
  int topic_id = 0;
  std::vector<std::string> keywords;
  std::vector<double> keyword_probs;
  double coherence = 0.0;
};

// Document-occurrence index over a reference corpus, used for UMass
// coherence.
class CooccurrenceIndex {
 public:
  explicit CooccurrenceIndex(const TokenizedCorpus& corpus);

  std::size_t doc_count(std::uint32_t term) const;
  std::size_t co_doc_count(std::uint32_t a, std::uint32_t b) const;
  const textprep::Vocabulary& vocabulary() const { return *vocabulary_; }

 private:
  const textprep::Vocabulary* vocabulary_;
  std::vector<std::vector<std::uint32_t>> postings_;  // term -> sorted doc ids
};

// UMass coherence of an ordered term list:
//   sum_{i=2..n} sum_{j<i} log((D(w_i, w_j) + 1) / D(w_j))
double coherence(const std::vector<std::string>& terms, const TokenizedCorpus& corpus);
double coherence(const std::vector<std::string>& terms, const CooccurrenceIndex& index);

// Top-n keywords per topic by descending phi, ties broken lexicographically.
// Coherence is computed against `reference` (for n == 1 it is 0).
std::vector<TopicSummary> topic_keywords(const TopicModel& model, int n,
                                         const TokenizedCorpus& reference);

// exp(-L / N) with L = sum over tokens of log sum_z theta[d][z] phi[z][w].
double perplexity(const TopicModel& model, const TokenizedCorpus& corpus);

struct SweepRow {
  int num_topics = 0;
  double mean_coherence = 0.0;
  double perplexity = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

// Trains one model per K (same seed), concurrently. Rows come back in
// ascending K; duplicates are collapsed. Keyword count for coherence is
// min(base.keyword_count, V).
std::vector<SweepRow> sweep_topic_count(const TokenizedCorpus& corpus,
                                        std::vector<int> k_values, const LdaConfig& base);

// Versioned JSON artifact with config, vocabulary hash, counts, phi, theta
// and the likelihood trace. Doubles round-trip exactly.
std::string save_model(const TopicModel& model);
TopicModel load_model(std::string_view json_text);

}  // namespace framekit::lda
