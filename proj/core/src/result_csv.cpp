#include "framekit/result_csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "framekit/csv.hpp"
#include "framekit/error.hpp"

namespace framekit {

namespace {

std::string fixed6(double v) {
  auto s = fmt::format("{:.6f}", v);
  if (s == "-0.000000") s.erase(0, 1);
  return s;
}

}  // namespace

std::string write_doc_topic_csv(const lda::TopicModel& model, const Corpus& corpus) {
  if (model.num_docs() != corpus.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("model has {} documents, corpus has {}", model.num_docs(),
                            corpus.size()));
  }
  const auto k = model.num_topics();
  std::string out;
  std::vector<std::string> row{"doc_id", "dominant_topic"};
  for (std::size_t t = 0; t < k; ++t) row.push_back(fmt::format("topic_{}", t));
  csv::append_row(out, row);
  for (std::size_t d = 0; d < model.num_docs(); ++d) {
    row.clear();
    row.push_back(std::to_string(corpus[d].id));
    row.push_back(std::to_string(model.dominant_topic(d)));
    for (std::size_t t = 0; t < k; ++t) row.push_back(fixed6(model.theta(d, t)));
    csv::append_row(out, row);
  }
  return out;
}

std::string write_topic_keywords_csv(const std::vector<lda::TopicSummary>& summaries) {
  if (summaries.empty()) throw Error(ErrorCode::kEmptyInput, "no topic summaries");
  const auto n = summaries.front().keywords.size();
  for (const auto& s : summaries) {
    if (s.keywords.size() != n) {
      throw Error(ErrorCode::kRaggedSummaries,
                  fmt::format("topic {} has {} keywords, expected {}", s.topic_id,
                              s.keywords.size(), n));
    }
  }
  std::vector<const lda::TopicSummary*> ordered;
  for (const auto& s : summaries) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->topic_id < b->topic_id; });

  std::string out;
  std::vector<std::string> row{"topic_id", "coherence"};
  for (std::size_t i = 1; i <= n; ++i) row.push_back(fmt::format("keyword_{}", i));
  csv::append_row(out, row);
  for (const auto* s : ordered) {
    row.clear();
    row.push_back(std::to_string(s->topic_id));
    row.push_back(fixed6(s->coherence));
    row.insert(row.end(), s->keywords.begin(), s->keywords.end());
    csv::append_row(out, row);
  }
  return out;
}

std::string write_predictions_csv(const std::vector<classifier::PredictionResult>& predictions,
                                  const std::vector<std::string>& labels) {
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (labels[order[i]] == labels[order[i - 1]]) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("duplicate label '{}'", labels[order[i]]));
    }
  }

  std::string out;
  std::vector<std::string> row{"doc_id", "predicted_label"};
  for (auto i : order) row.push_back("p_" + labels[i]);
  csv::append_row(out, row);
  for (const auto& p : predictions) {
    if (p.probabilities.size() != labels.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("document {}: {} probabilities for {} labels", p.doc_id,
                              p.probabilities.size(), labels.size()));
    }
    double sum = 0.0;
    for (double v : p.probabilities) sum += v;
    if (!std::isfinite(sum) || std::abs(sum - 1.0) > 1e-6) {
      throw Error(ErrorCode::kNormalizationError,
                  fmt::format("document {}: probabilities sum to {}", p.doc_id, sum));
    }
    std::size_t best = order.front();
    for (auto i : order) {
      if (p.probabilities[i] > p.probabilities[best]) best = i;
    }
    row.clear();
    row.push_back(std::to_string(p.doc_id));
    row.push_back(labels[best]);
    for (auto i : order) row.push_back(fixed6(p.probabilities[i]));
    csv::append_row(out, row);
  }
  return out;
}

std::string write_sweep_csv(const std::vector<lda::SweepRow>& rows) {
  std::string out;
  csv::append_row(out, std::vector<std::string>{"num_topics", "mean_coherence", "perplexity"});
  for (const auto& r : rows) {
    csv::append_row(out, std::vector<std::string>{std::to_string(r.num_topics),
                                                  fixed6(r.mean_coherence), fixed6(r.perplexity)});
  }
  return out;
}

}  // namespace framekit
