#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "framekit/classifier.hpp"

namespace framekit::classifier {

struct RegistryEntry {
  std::string model_id;
  std::string issue_name;
  std::vector<std::string> labels;
  Backend backend = Backend::kReferenceLinear;
  double accuracy = 0.0;
  std::size_t test_size = 0;
  std::string sha256;  // of the artifact file
};

// Directory of model artifacts, one `<model_id>.fkm` file per model. Writes
// go through an in-process mutex plus an advisory lock file, so concurrent
// writers (threads or processes) are serialized. Loaded models are
// immutable values.
class ModelRegistry {
 public:
  // Creates the directory when missing. With `install_demos`, the bundled
  // synthetic demo models are added if they are not present yet.
  explicit ModelRegistry(std::filesystem::path dir, bool install_demos = true);

  // Sorted by model id. Throws CorruptModelFile naming the bad file.
  std::vector<RegistryEntry> list() const;

  // Persists the model and returns its id. An empty model_id is replaced by
  // one derived from the artifact checksum. Throws DuplicateModelId.
  std::string add(ClassifierModel model);

  ClassifierModel get(const std::string& model_id) const;
  // Raw artifact bytes, checksum-verified.
  std::string read_artifact(const std::string& model_id) const;
  bool contains(const std::string& model_id) const;

  const std::filesystem::path& dir() const { return dir_; }

  static bool is_valid_model_id(std::string_view id);

 private:
  std::filesystem::path path_for(const std::string& model_id) const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
};

// Ids of the bundled demo models.
std::vector<std::string> demo_model_ids();

// Deterministically trains the demo models from built-in synthetic corpora.
std::vector<ClassifierModel> build_demo_models();

// Synthetic labeled corpus: for each label, `docs_per_label` documents of
// `doc_length` words drawn from that label's word pool. Used by the demo
// models, tests and benchmarks.
Corpus synthetic_labeled_corpus(const std::vector<std::pair<std::string, std::vector<std::string>>>& pools,
                                std::size_t docs_per_label, std::size_t doc_length,
                                std::uint64_t seed);

}  // namespace framekit::classifier
