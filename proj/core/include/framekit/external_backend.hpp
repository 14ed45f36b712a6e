#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "framekit/classifier.hpp"
#include "framekit/corpus.hpp"

namespace framekit::classifier {

// HTTP client for an out-of-process transformer engine. The engine exposes
//
//   POST <endpoint>/train    {"issue_name", "labels", "config", "documents": [{"text", "label"}]}
//                            -> {"model": "<handle>"}
//   POST <endpoint>/predict  {"model", "labels", "documents": [{"doc_id", "text"}]}
//                            -> {"predictions": [{"doc_id", "probabilities": [...]}]}
//
// with probabilities aligned to the sorted label list. Any transport failure
// or non-200 reply surfaces as Error(kBackendUnavailable).
class ExternalTransformerClient {
 public:
  explicit ExternalTransformerClient(std::string endpoint,
                                     std::chrono::milliseconds timeout = std::chrono::seconds(30));

  std::string train(const std::string& issue_name, const std::vector<std::string>& labels,
                    const Corpus& train, const TrainConfig& config) const;

  std::vector<std::vector<double>> predict(const std::string& remote_model,
                                           const std::vector<std::string>& labels,
                                           const Corpus& corpus) const;

 private:
  std::string post(const std::string& route, const std::string& body) const;

  std::string base_;    // scheme://host:port
  std::string prefix_;  // optional path prefix without trailing slash
  std::chrono::milliseconds timeout_;
};

// Trains through the external engine and evaluates it on `test` by
// prediction. The returned model carries no weights, only the remote handle.
ClassifierModel train_external(const std::string& endpoint, const std::string& issue_name,
                               const Corpus& train, const Corpus& test,
                               const TrainConfig& config);

}  // namespace framekit::classifier
