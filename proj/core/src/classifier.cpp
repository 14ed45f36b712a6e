#include "framekit/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "framekit/error.hpp"
#include "framekit/external_backend.hpp"
#include "framekit/rng.hpp"

namespace framekit::classifier {

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::kReferenceLinear: return "reference-linear";
    case Backend::kExternalTransformer: return "external-transformer";
  }
  return "unknown";
}

Backend backend_from_name(std::string_view name) {
  if (name == "reference-linear") return Backend::kReferenceLinear;
  if (name == "external-transformer") return Backend::kExternalTransformer;
  throw Error(ErrorCode::kInvalidConfig, fmt::format("unknown backend '{}'", name), "backend");
}

double TrainConfig::learning_rate_for(Backend backend) const {
  if (learning_rate) return *learning_rate;
  return backend == Backend::kReferenceLinear ? kReferenceLearningRate : kTransformerLearningRate;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::kInvalidConfig, "epochs must be >= 1", "epochs");
  if (batch_size < 1) {
    throw Error(ErrorCode::kInvalidConfig, "batch_size must be >= 1", "batch_size");
  }
  if (learning_rate && !(*learning_rate > 0.0 && std::isfinite(*learning_rate))) {
    throw Error(ErrorCode::kInvalidConfig, "learning_rate must be > 0", "learning_rate");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "test_fraction must be in (0, 1)", "test_fraction");
  }
  if (!(l2_penalty >= 0.0 && std::isfinite(l2_penalty))) {
    throw Error(ErrorCode::kInvalidConfig, "l2_penalty must be >= 0", "l2_penalty");
  }
}

PrepSettings PrepSettings::from(const textprep::PrepConfig& config) {
  return {config.min_token_len, config.stem_enabled, config.min_doc_freq, config.max_doc_ratio,
          config.stopwords.sorted_words()};
}

textprep::PrepConfig PrepSettings::to_config() const {
  textprep::PrepConfig config;
  config.min_token_len = min_token_len;
  config.stem_enabled = stem_enabled;
  config.min_doc_freq = min_doc_freq;
  config.max_doc_ratio = max_doc_ratio;
  config.stopwords = textprep::StopwordSet(stopwords);
  return config;
}

void ClassifierModel::validate() const {
  if (labels.size() < 2) {
    throw Error(ErrorCode::kInvalidConfig, "a classifier needs at least two labels", "labels");
  }
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (!(labels[i - 1] < labels[i])) {
      throw Error(ErrorCode::kInvalidConfig, "labels must be sorted and unique", "labels");
    }
  }
  if (backend == Backend::kReferenceLinear) {
    const auto vocab_size = feature_spec.vocabulary.size();
    if (weights.rows() != labels.size() || weights.cols() != vocab_size + 1) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("weights are {}x{}, expected {}x{}", weights.rows(),
                              weights.cols(), labels.size(), vocab_size + 1),
                  "weights");
    }
    if (feature_spec.idf.size() != vocab_size) {
      throw Error(ErrorCode::kDimensionMismatch, "idf length differs from vocabulary", "idf");
    }
  } else if (endpoint.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "external backend needs an endpoint", "endpoint");
  }
}

ValidationReport validate_labeled_corpus(const Corpus& corpus) {
  ValidationReport report;
  report.label_counts = corpus.label_counts();
  if (!corpus.has_labels()) {
    report.failures.push_back("every document needs a non-empty \"Label\"");
  }
  if (report.label_counts.size() < 2) {
    report.failures.push_back(fmt::format("need at least 2 distinct labels, found {}",
                                          report.label_counts.size()));
  }
  for (const auto& [label, count] : report.label_counts) {
    if (count < kMinimumDocsPerLabel) {
      report.failures.push_back(fmt::format("label \"{}\" has {} documents; at least {} are required",
                                            label, count, kMinimumDocsPerLabel));
    }
    if (count < kRecommendedDocsPerLabel) {
      report.warn_labels.push_back(label);
      report.warnings.push_back(fmt::format("label \"{}\" has {} documents; about {} are recommended",
                                            label, count, kRecommendedDocsPerLabel));
    }
  }
  return report;
}

std::pair<Corpus, Corpus> split_train_test(const Corpus& corpus, const TrainConfig& config) {
  config.validate();
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (const auto& doc : corpus.documents()) {
    if (!doc.label) {
      throw Error(ErrorCode::kEmptyLabel, fmt::format("document {} has no label", doc.id));
    }
    by_label[*doc.label].push_back(doc.id);
  }

  Xoshiro256 rng(config.seed);
  std::vector<Document> train;
  std::vector<Document> test;
  for (auto& [label, ids] : by_label) {
    rng.shuffle(std::span(ids));
    const double exact = (1.0 - config.test_fraction) * static_cast<double>(ids.size());
    // Guard against 0.8 * 10 landing a hair above 8.
    const auto n_train = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    if (n_train == 0 || n_train >= ids.size()) {
      throw Error(ErrorCode::kLabelTooSmall,
                  fmt::format("label \"{}\" with {} documents cannot be split with test_fraction {}",
                              label, ids.size(), config.test_fraction),
                  "test_fraction");
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      (i < n_train ? train : test).push_back(corpus[ids[i]]);
    }
  }
  return {Corpus(std::move(train), corpus.source_name()),
          Corpus(std::move(test), corpus.source_name())};
}

namespace {

std::vector<std::size_t> label_indices(const Corpus& corpus, const std::vector<std::string>& labels) {
  std::vector<std::size_t> out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) {
    if (!doc.label) {
      throw Error(ErrorCode::kEmptyLabel, fmt::format("document {} has no label", doc.id));
    }
    const auto it = std::lower_bound(labels.begin(), labels.end(), *doc.label);
    if (it == labels.end() || *it != *doc.label) {
      throw Error(ErrorCode::kValidationFailed,
                  fmt::format("label \"{}\" does not occur in the training data", *doc.label));
    }
    out.push_back(static_cast<std::size_t>(it - labels.begin()));
  }
  return out;
}

std::vector<SparseVector> featurize(const ClassifierModel& model, const Corpus& corpus,
                                    const textprep::PrepConfig& prep) {
  const auto encoded = textprep::encode(corpus.texts(), model.feature_spec.vocabulary, prep);
  std::vector<SparseVector> xs;
  xs.reserve(encoded.size());
  for (const auto& ids : encoded) xs.push_back(model.feature_spec.transform(ids));
  return xs;
}

std::vector<double> probabilities(const Matrix<double>& weights, const SparseVector& x) {
  const std::size_t bias = weights.cols() - 1;
  std::vector<double> logits(weights.rows());
  for (std::size_t c = 0; c < weights.rows(); ++c) {
    double z = weights(c, bias);
    for (std::size_t t = 0; t < x.ids.size(); ++t) z += weights(c, x.ids[t]) * x.values[t];
    logits[c] = z;
  }
  std::vector<double> probs(logits.size());
  softmax(logits, probs);
  return probs;
}

}  // namespace

ClassifierModel train_reference(const Corpus& train, const Corpus& test,
                                const TrainConfig& config, const textprep::PrepConfig& prep) {
  config.validate();
  prep.validate();

  ClassifierModel model;
  model.backend = Backend::kReferenceLinear;
  model.train_config = config;
  model.prep = PrepSettings::from(prep);
  for (const auto& [label, count] : train.label_counts()) model.labels.push_back(label);
  if (model.labels.size() < 2) {
    throw Error(ErrorCode::kValidationFailed, "training data needs at least two labels");
  }
  const auto train_y = label_indices(train, model.labels);
  const auto test_y = label_indices(test, model.labels);

  const auto tokenized = textprep::build_tokenized_corpus(train, prep);
  model.feature_spec = FeatureSpec::fit(tokenized);
  std::vector<SparseVector> xs;
  xs.reserve(tokenized.docs.size());
  for (const auto& ids : tokenized.docs) xs.push_back(model.feature_spec.transform(ids));

  const auto num_labels = model.labels.size();
  model.weights = Matrix<double>(num_labels, model.feature_spec.vocabulary.size() + 1);
  const double lr = config.learning_rate_for(model.backend);

  Xoshiro256 rng(config.seed);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  Matrix<double> gradient;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const auto end = std::min(order.size(), start + batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      const double loss =
          softmax_objective(model.weights, xs, train_y, batch, config.l2_penalty, &gradient);
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::kNonFiniteLoss,
                    fmt::format("loss diverged in epoch {} (learning_rate={})", epoch + 1, lr),
                    "learning_rate");
      }
      auto& w = model.weights.data();
      const auto& g = gradient.data();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
    }
    const double epoch_loss =
        softmax_objective(model.weights, xs, train_y, order, config.l2_penalty, nullptr);
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorCode::kNonFiniteLoss,
                  fmt::format("loss diverged in epoch {} (learning_rate={})", epoch + 1, lr),
                  "learning_rate");
    }
    model.epoch_losses.push_back(epoch_loss);
  }

  const auto test_x = featurize(model, test, prep);
  std::vector<std::size_t> predicted;
  predicted.reserve(test_x.size());
  for (const auto& x : test_x) predicted.push_back(argmax(probabilities(model.weights, x)));
  model.metrics = evaluate(test_y, predicted, num_labels);
  return model;
}

std::vector<PredictionResult> predict(const ClassifierModel& model, const Corpus& corpus,
                                      const textprep::PrepConfig& prep) {
  model.validate();
  std::vector<PredictionResult> results;
  results.reserve(corpus.size());
  if (model.backend == Backend::kExternalTransformer) {
    const ExternalTransformerClient client(model.endpoint);
    auto probs = client.predict(model.remote_model, model.labels, corpus);
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      const auto best = argmax(probs[d]);
      results.push_back({d, model.labels[best], std::move(probs[d])});
    }
    return results;
  }
  const auto xs = featurize(model, corpus, prep);
  for (std::size_t d = 0; d < xs.size(); ++d) {
    auto probs = probabilities(model.weights, xs[d]);
    const auto best = argmax(probs);
    results.push_back({d, model.labels[best], std::move(probs)});
  }
  return results;
}

std::vector<PredictionResult> predict(const ClassifierModel& model, const Corpus& corpus) {
  return predict(model, corpus, model.prep.to_config());
}

}  // namespace framekit::classifier
