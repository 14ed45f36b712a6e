#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "framekit/corpus.hpp"
#include "framekit/matrix.hpp"
#include "framekit/textprep.hpp"

namespace framekit::classifier {

enum class Backend { kReferenceLinear, kExternalTransformer };

std::string_view backend_name(Backend backend);
Backend backend_from_name(std::string_view name);

// Default step size for the TF-IDF softmax model.
inline constexpr double kReferenceLearningRate = 0.1;
// Transformer fine-tuning defaults, passed through to external backends.
inline constexpr double kTransformerLearningRate = 5e-5;
inline constexpr int kDefaultEpochs = 3;
inline constexpr int kDefaultBatchSize = 8;

struct TrainConfig {
  int epochs = kDefaultEpochs;
  int batch_size = kDefaultBatchSize;
  // Backend-dependent default when unset.
  std::optional<double> learning_rate;
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
  double l2_penalty = 1e-4;

  double learning_rate_for(Backend backend) const;
  // Throws Error(kInvalidConfig) naming the field.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct SparseVector {
  std::vector<std::uint32_t> ids;  // ascending
  std::vector<double> values;
};

// TF-IDF featurization: tf is the raw count, idf = ln(D / df) + 1, and each
// document vector is L2-normalized.
struct FeatureSpec {
  textprep::Vocabulary vocabulary;
  std::vector<double> idf;

  static FeatureSpec fit(const textprep::TokenizedCorpus& corpus);
  SparseVector transform(std::span<const std::uint32_t> token_ids) const;
};

struct EvalReport {
  double accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  Matrix<std::int64_t> confusion;  // rows: gold label, cols: predicted
  std::size_t test_size = 0;
};

// Builds the report from gold and predicted label indices.
EvalReport evaluate(std::span<const std::size_t> gold, std::span<const std::size_t> predicted,
                    std::size_t num_labels);

struct PrepSettings {
  int min_token_len = 2;
  bool stem_enabled = true;
  int min_doc_freq = 2;
  double max_doc_ratio = 0.5;
  std::vector<std::string> stopwords;  // sorted

  static PrepSettings from(const textprep::PrepConfig& config);
  textprep::PrepConfig to_config() const;
};

struct ClassifierModel {
  std::string model_id;
  std::string issue_name;
  std::vector<std::string> labels;  // sorted, unique, size >= 2
  Backend backend = Backend::kReferenceLinear;
  FeatureSpec feature_spec;
  PrepSettings prep;
  Matrix<double> weights;  // C x (V + 1); last column is the bias
  EvalReport metrics;
  TrainConfig train_config;
  std::vector<double> epoch_losses;  // training objective after each epoch
  // external-transformer only
  std::string endpoint;
  std::string remote_model;

  // Throws Error(kInvalidConfig) when an invariant does not hold.
  void validate() const;
};

struct PredictionResult {
  std::size_t doc_id = 0;
  std::string predicted_label;
  std::vector<double> probabilities;  // aligned with the model's labels
};

inline constexpr std::size_t kRecommendedDocsPerLabel = 100;
inline constexpr std::size_t kMinimumDocsPerLabel = 10;

struct ValidationReport {
  std::map<std::string, std::size_t> label_counts;
  std::vector<std::string> warn_labels;  // under kRecommendedDocsPerLabel
  std::vector<std::string> warnings;
  std::vector<std::string> failures;

  std::size_t distinct_labels() const { return label_counts.size(); }
  bool ok() const { return failures.empty(); }
};

ValidationReport validate_labeled_corpus(const Corpus& corpus);

// Stratified split: per label (in label order) the documents are shuffled by
// the seeded generator and the first ceil((1 - test_fraction) n) go to train.
std::pair<Corpus, Corpus> split_train_test(const Corpus& corpus, const TrainConfig& config);

// Trains the TF-IDF + multinomial logistic regression backend by mini-batch
// gradient descent and evaluates it on `test`.
ClassifierModel train_reference(const Corpus& train, const Corpus& test,
                                const TrainConfig& config, const textprep::PrepConfig& prep);

std::vector<PredictionResult> predict(const ClassifierModel& model, const Corpus& corpus,
                                      const textprep::PrepConfig& prep);
// Uses the preprocessing settings stored with the model.
std::vector<PredictionResult> predict(const ClassifierModel& model, const Corpus& corpus);

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

// Numerically stable softmax.
void softmax(std::span<const double> logits, std::span<double> out);

// Objective of the reference backend over the examples selected by `batch`:
//   mean cross-entropy + (l2 / 2) * sum of squared non-bias weights.
// When `gradient` is non-null it receives d(objective)/d(weights).
double softmax_objective(const Matrix<double>& weights, const std::vector<SparseVector>& xs,
                         const std::vector<std::size_t>& ys, std::span<const std::size_t> batch,
                         double l2, Matrix<double>* gradient);

// Versioned, checksummed binary artifact:
//   "FRAMEKIT" | u32 version | u32 reserved | u64 header_len | u64 payload_len |
//   sha256(header || payload) | JSON header | little-endian f64 payload
// The payload holds the weight matrix followed by the idf vector.
inline constexpr std::uint32_t kModelFormatVersion = 1;
std::string encode_model(const ClassifierModel& model);
// `source` names the file in CorruptModelFile messages.
ClassifierModel decode_model(std::string_view bytes, std::string_view source = "<memory>");

}  // namespace framekit::classifier
