#include "framekit/external_backend.hpp"

#include <cmath>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "framekit/error.hpp"

namespace framekit::classifier {

using nlohmann::json;

ExternalTransformerClient::ExternalTransformerClient(std::string endpoint,
                                                     std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  const auto scheme_end = endpoint.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = endpoint.find('/', host_start);
  base_ = endpoint.substr(0, path_start);
  if (path_start != std::string::npos) {
    prefix_ = endpoint.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
}

std::string ExternalTransformerClient::post(const std::string& route,
                                            const std::string& body) const {
  httplib::Client client(base_);
  if (!client.is_valid()) {
    throw Error(ErrorCode::kBackendUnavailable,
                fmt::format("invalid transformer endpoint '{}'", base_), "endpoint");
  }
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  const auto result = client.Post(prefix_ + route, body, "application/json");
  if (!result) {
    throw Error(ErrorCode::kBackendUnavailable,
                fmt::format("transformer backend at {} unreachable: {}", base_,
                            httplib::to_string(result.error())),
                "endpoint");
  }
  if (result->status != 200) {
    throw Error(ErrorCode::kBackendUnavailable,
                fmt::format("transformer backend returned HTTP {} for {}", result->status, route),
                "endpoint");
  }
  return result->body;
}

std::string ExternalTransformerClient::train(const std::string& issue_name,
                                             const std::vector<std::string>& labels,
                                             const Corpus& train,
                                             const TrainConfig& config) const {
  json docs = json::array();
  for (const auto& d : train.documents()) {
    docs.push_back({{"text", d.text}, {"label", d.label.value_or("")}});
  }
  const json request{
      {"issue_name", issue_name},
      {"labels", labels},
      {"config",
       {{"learning_rate", config.learning_rate_for(Backend::kExternalTransformer)},
        {"epochs", config.epochs},
        {"batch_size", config.batch_size},
        {"seed", config.seed}}},
      {"documents", std::move(docs)}};
  try {
    const auto reply = json::parse(post("/train", request.dump()));
    return reply.at("model").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBackendUnavailable,
                fmt::format("malformed reply from transformer backend: {}", e.what()));
  }
}

std::vector<std::vector<double>> ExternalTransformerClient::predict(
    const std::string& remote_model, const std::vector<std::string>& labels,
    const Corpus& corpus) const {
  json docs = json::array();
  for (const auto& d : corpus.documents()) docs.push_back({{"doc_id", d.id}, {"text", d.text}});
  const json request{{"model", remote_model}, {"labels", labels}, {"documents", std::move(docs)}};

  std::vector<std::vector<double>> probs(corpus.size());
  try {
    const auto reply = json::parse(post("/predict", request.dump()));
    const auto& predictions = reply.at("predictions");
    if (predictions.size() != corpus.size()) {
      throw Error(ErrorCode::kBackendUnavailable,
                  fmt::format("transformer backend returned {} predictions for {} documents",
                              predictions.size(), corpus.size()));
    }
    for (const auto& p : predictions) {
      const auto doc_id = p.at("doc_id").get<std::size_t>();
      auto row = p.at("probabilities").get<std::vector<double>>();
      double total = 0.0;
      for (const double v : row) total += v;
      if (doc_id >= corpus.size() || row.size() != labels.size() ||
          std::abs(total - 1.0) > 1e-6) {
        throw Error(ErrorCode::kBackendUnavailable,
                    fmt::format("invalid prediction row for document {}", doc_id));
      }
      probs[doc_id] = std::move(row);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBackendUnavailable,
                fmt::format("malformed reply from transformer backend: {}", e.what()));
  }
  return probs;
}

ClassifierModel train_external(const std::string& endpoint, const std::string& issue_name,
                               const Corpus& train, const Corpus& test,
                               const TrainConfig& config) {
  config.validate();
  ClassifierModel model;
  model.backend = Backend::kExternalTransformer;
  model.issue_name = issue_name;
  model.endpoint = endpoint;
  model.train_config = config;
  for (const auto& [label, count] : train.label_counts()) model.labels.push_back(label);
  if (model.labels.size() < 2) {
    throw Error(ErrorCode::kValidationFailed, "training data needs at least two labels");
  }

  const ExternalTransformerClient client(endpoint);
  model.remote_model = client.train(issue_name, model.labels, train, config);

  const auto probs = client.predict(model.remote_model, model.labels, test);
  std::vector<std::size_t> gold;
  std::vector<std::size_t> predicted;
  for (std::size_t d = 0; d < test.size(); ++d) {
    const auto& label = test[d].label;
    const auto it = std::find(model.labels.begin(), model.labels.end(), label.value_or(""));
    if (it == model.labels.end()) {
      throw Error(ErrorCode::kValidationFailed,
                  fmt::format("test label \"{}\" does not occur in the training data",
                              label.value_or("")));
    }
    gold.push_back(static_cast<std::size_t>(it - model.labels.begin()));
    predicted.push_back(argmax(probs[d]));
  }
  model.metrics = evaluate(gold, predicted, model.labels.size());
  return model;
}

}  // namespace framekit::classifier
