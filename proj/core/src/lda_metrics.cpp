#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include <fmt/format.h>

#include "framekit/error.hpp"
#include "framekit/lda.hpp"

namespace framekit::lda {

CooccurrenceIndex::CooccurrenceIndex(const TokenizedCorpus& corpus)
    : vocabulary_(&corpus.vocabulary), postings_(corpus.vocabulary.size()) {
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    for (const auto w : corpus.docs[d]) {
      auto& list = postings_.at(w);
      if (list.empty() || list.back() != d) list.push_back(static_cast<std::uint32_t>(d));
    }
  }
}

std::size_t CooccurrenceIndex::doc_count(std::uint32_t term) const {
  return postings_.at(term).size();
}

std::size_t CooccurrenceIndex::co_doc_count(std::uint32_t a, std::uint32_t b) const {
  const auto& x = postings_.at(a);
  const auto& y = postings_.at(b);
  std::size_t n = 0;
  auto i = x.begin();
  auto j = y.begin();
  while (i != x.end() && j != y.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double coherence(const std::vector<std::string>& terms, const CooccurrenceIndex& index) {
  if (terms.size() < 2) {
    throw Error(ErrorCode::kInvalidConfig, "coherence needs at least two terms", "terms");
  }
  std::vector<std::uint32_t> ids;
  ids.reserve(terms.size());
  for (const auto& term : terms) {
    const auto id = index.vocabulary().id_of(term);
    if (!id) {
      throw Error(ErrorCode::kTermNotInVocabulary,
                  fmt::format("term '{}' is not in the vocabulary", term), "terms");
    }
    if (index.doc_count(*id) == 0) {
      throw Error(ErrorCode::kTermNotInVocabulary,
                  fmt::format("term '{}' occurs in no reference document", term), "terms");
    }
    ids.push_back(*id);
  }

  double score = 0.0;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const auto joint = static_cast<double>(index.co_doc_count(ids[i], ids[j]));
      const auto marginal = static_cast<double>(index.doc_count(ids[j]));
      score += std::log((joint + 1.0) / marginal);
    }
  }
  return score;
}

double coherence(const std::vector<std::string>& terms, const TokenizedCorpus& corpus) {
  return coherence(terms, CooccurrenceIndex(corpus));
}

std::vector<TopicSummary> topic_keywords(const TopicModel& model, int n,
                                         const TokenizedCorpus& reference) {
  const auto vocab_size = model.vocab_size();
  if (n < 1) {
    throw Error(ErrorCode::kInvalidConfig, "keyword count must be >= 1", "keyword_count");
  }
  if (static_cast<std::size_t>(n) > vocab_size) {
    throw Error(ErrorCode::kKeywordCountExceedsVocabulary,
                fmt::format("keyword count {} exceeds vocabulary size {}", n, vocab_size),
                "keyword_count");
  }

  const CooccurrenceIndex index(reference);
  std::vector<TopicSummary> summaries;
  summaries.reserve(model.num_topics());
  std::vector<std::uint32_t> order(vocab_size);
  for (std::size_t k = 0; k < model.num_topics(); ++k) {
    const auto row = model.phi.row(k);
    std::iota(order.begin(), order.end(), 0u);
    // Term ids follow lexicographic term order, so the id breaks ties.
    std::partial_sort(order.begin(), order.begin() + n, order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return a < b;
                      });
    TopicSummary summary;
    summary.topic_id = static_cast<int>(k);
    for (int i = 0; i < n; ++i) {
      summary.keywords.push_back(model.terms.at(order[i]));
      summary.keyword_probs.push_back(row[order[i]]);
    }
    summary.coherence = n >= 2 ? coherence(summary.keywords, index) : 0.0;
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

double perplexity(const TopicModel& model, const TokenizedCorpus& corpus) {
  if (model.num_docs() != corpus.docs.size() ||
      model.vocab_size() != corpus.vocabulary.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("model is {} docs x {} terms, corpus is {} docs x {} terms",
                            model.num_docs(), model.vocab_size(), corpus.docs.size(),
                            corpus.vocabulary.size()));
  }
  const auto num_topics = model.num_topics();
  double log_likelihood = 0.0;
  std::size_t tokens = 0;
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    const auto theta = model.theta.row(d);
    for (const auto w : corpus.docs[d]) {
      double p = 0.0;
      for (std::size_t k = 0; k < num_topics; ++k) p += theta[k] * model.phi(k, w);
      log_likelihood += std::log(p);
      ++tokens;
    }
  }
  if (tokens == 0) {
    throw Error(ErrorCode::kAllDocumentsEmpty, "perplexity of an empty corpus is undefined");
  }
  return std::exp(-log_likelihood / static_cast<double>(tokens));
}

std::vector<SweepRow> sweep_topic_count(const TokenizedCorpus& corpus,
                                        std::vector<int> k_values, const LdaConfig& base) {
  std::sort(k_values.begin(), k_values.end());
  k_values.erase(std::unique(k_values.begin(), k_values.end()), k_values.end());
  if (k_values.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "no topic counts to sweep", "k_values");
  }
  for (const int k : k_values) {
    LdaConfig config = base;
    config.num_topics = k;
    config.validate();
  }

  const int keywords = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(base.keyword_count), corpus.vocabulary.size()));

  std::vector<std::future<SweepRow>> pending;
  pending.reserve(k_values.size());
  for (const int k : k_values) {
    pending.push_back(std::async(std::launch::async, [&corpus, &base, k, keywords] {
      LdaConfig config = base;
      config.num_topics = k;
      const auto model = train_lda(corpus, config);
      const auto summaries = topic_keywords(model, keywords, corpus);
      double total = 0.0;
      for (const auto& s : summaries) total += s.coherence;
      return SweepRow{k, total / static_cast<double>(summaries.size()),
                      perplexity(model, corpus)};
    }));
  }
  std::vector<SweepRow> rows;
  rows.reserve(pending.size());
  for (auto& f : pending) rows.push_back(f.get());
  return rows;
}

}  // namespace framekit::lda
