#include <algorithm>
#include <cmath>
#include <map>

#include "framekit/classifier.hpp"
#include "framekit/error.hpp"

namespace framekit::classifier {

FeatureSpec FeatureSpec::fit(const textprep::TokenizedCorpus& corpus) {
  FeatureSpec spec;
  spec.vocabulary = corpus.vocabulary;
  const auto num_docs = static_cast<double>(corpus.docs.size());
  spec.idf.reserve(spec.vocabulary.size());
  for (const auto df : spec.vocabulary.doc_freq()) {
    spec.idf.push_back(std::log(num_docs / static_cast<double>(df)) + 1.0);
  }
  return spec;
}

SparseVector FeatureSpec::transform(std::span<const std::uint32_t> token_ids) const {
  std::map<std::uint32_t, double> counts;
  for (const auto id : token_ids) {
    if (id >= idf.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "token id outside the feature vocabulary");
    }
    counts[id] += 1.0;
  }
  SparseVector x;
  x.ids.reserve(counts.size());
  x.values.reserve(counts.size());
  double norm_sq = 0.0;
  for (const auto& [id, tf] : counts) {
    const double v = tf * idf[id];
    x.ids.push_back(id);
    x.values.push_back(v);
    norm_sq += v * v;
  }
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& v : x.values) v *= inv;
  }
  return x;
}

EvalReport evaluate(std::span<const std::size_t> gold, std::span<const std::size_t> predicted,
                    std::size_t num_labels) {
  if (gold.size() != predicted.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "gold and predicted label counts differ");
  }
  EvalReport report;
  report.test_size = gold.size();
  report.confusion = Matrix<std::int64_t>(num_labels, num_labels);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] >= num_labels || predicted[i] >= num_labels) {
      throw Error(ErrorCode::kDimensionMismatch, "label index out of range");
    }
    ++report.confusion(gold[i], predicted[i]);
  }
  std::int64_t correct = 0;
  for (std::size_t c = 0; c < num_labels; ++c) correct += report.confusion(c, c);
  report.accuracy = report.test_size == 0
                        ? 0.0
                        : static_cast<double>(correct) / static_cast<double>(report.test_size);

  for (std::size_t c = 0; c < num_labels; ++c) {
    std::int64_t predicted_c = 0;
    std::int64_t gold_c = 0;
    for (std::size_t o = 0; o < num_labels; ++o) {
      predicted_c += report.confusion(o, c);
      gold_c += report.confusion(c, o);
    }
    const auto tp = static_cast<double>(report.confusion(c, c));
    const double p = predicted_c == 0 ? 0.0 : tp / static_cast<double>(predicted_c);
    const double r = gold_c == 0 ? 0.0 : tp / static_cast<double>(gold_c);
    report.precision.push_back(p);
    report.recall.push_back(r);
    report.f1.push_back(p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r));
  }
  return report;
}

}  // namespace framekit::classifier
