#include <fmt/format.h>

#include "framekit/error.hpp"
#include "framekit/external_backend.hpp"
#include "framekit/hash.hpp"
#include "framekit/job_service.hpp"
#include "framekit/result_csv.hpp"
#include "framekit/textprep.hpp"
#include "job_params.hpp"

namespace framekit::jobs {
using nlohmann::json;

namespace {

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

std::vector<zip::Entry> run_lda_train(const json& p, const Corpus& corpus) {
  const textprep::PrepConfig prep;
  const auto tc = textprep::build_tokenized_corpus(corpus, prep);
  const auto config = lda_config_from(p, p.at("num_topics").get<int>());
  const auto model = lda::train_lda(tc, config);
  const auto summaries = lda::topic_keywords(model, config.keyword_count, tc);
  const double perp = lda::perplexity(model, tc);

  json topics = json::array();
  double mean = 0.0;
  for (const auto& s : summaries) {
    topics.push_back({{"topic_id", s.topic_id},
                      {"coherence", s.coherence},
                      {"keywords", s.keywords},
                      {"keyword_probs", s.keyword_probs}});
    mean += s.coherence;
  }
  mean /= static_cast<double>(summaries.size());
  json trace = json::array();
  for (const auto& c : model.log_likelihood_trace) {
    trace.push_back({{"iteration", c.iteration}, {"log_likelihood", c.log_likelihood}});
  }
  const json metrics{
      {"num_topics", config.num_topics},
      {"num_documents", corpus.size()},
      {"num_tokens", tc.total_tokens()},
      {"vocabulary_size", tc.vocabulary.size()},
      {"vocabulary_hash", model.vocabulary_hash},
      {"alpha", config.effective_alpha()},
      {"beta", config.beta},
      {"iterations", config.iterations},
      {"seed", config.seed},
      {"perplexity", perp},
      {"coherence", topics},
      {"mean_coherence", mean},
      {"log_likelihood_trace", trace},
      {"empty_doc_ids", model.empty_doc_ids},
  };
  return {{"topic_keywords.csv", write_topic_keywords_csv(summaries)},
          {"doc_topics.csv", write_doc_topic_csv(model, corpus)},
          {"metrics.json", pretty(metrics)}};
}

std::vector<zip::Entry> run_lda_sweep(const json& p, const Corpus& corpus) {
  const textprep::PrepConfig prep;
  const auto tc = textprep::build_tokenized_corpus(corpus, prep);
  const auto ks = p.at("k_values").get<std::vector<int>>();
  const auto rows = lda::sweep_topic_count(tc, ks, lda_config_from(p, ks.front()));
  return {{"sweep.csv", write_sweep_csv(rows)}};
}

json eval_report(const classifier::ClassifierModel& model,
                 const std::vector<std::string>& warnings) {
  const auto& m = model.metrics;
  json per_label = json::array();
  for (std::size_t i = 0; i < model.labels.size(); ++i) {
    std::int64_t support = 0;
    for (std::size_t k = 0; k < m.confusion.cols(); ++k) support += m.confusion(i, k);
    per_label.push_back({{"label", model.labels[i]},
                         {"precision", m.precision[i]},
                         {"recall", m.recall[i]},
                         {"f1", m.f1[i]},
                         {"support", support}});
  }
  json confusion = json::array();
  for (std::size_t i = 0; i < m.confusion.rows(); ++i) {
    const auto row = m.confusion.row(i);
    confusion.push_back(std::vector<std::int64_t>(row.begin(), row.end()));
  }
  const auto& c = model.train_config;
  return {{"model_id", model.model_id},
          {"issue_name", model.issue_name},
          {"backend", classifier::backend_name(model.backend)},
          {"labels", model.labels},
          {"accuracy", m.accuracy},
          {"test_size", m.test_size},
          {"per_label", per_label},
          {"confusion", confusion},
          {"train_config",
           {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate_for(model.backend)},
            {"test_fraction", c.test_fraction},
            {"seed", c.seed},
            {"l2_penalty", c.l2_penalty}}},
          {"epoch_losses", model.epoch_losses},
          {"warnings", warnings}};
}

}  // namespace

std::vector<zip::Entry> JobService::execute(const Job& job) {
  const auto& p = job.params;
  switch (job.kind) {
    case JobKind::kLdaTrain:
      return run_lda_train(p, load_corpus(p.at("corpus_id"), false));
    case JobKind::kLdaSweep:
      return run_lda_sweep(p, load_corpus(p.at("corpus_id"), false));
    case JobKind::kClfPredict: {
      const auto model = registry_.get(p.at("model_id"));
      // Labels, if present, are ignored.
      const auto corpus = load_corpus(p.at("corpus_id"), false);
      const auto preds = classifier::predict(model, corpus);
      return {{"predictions.csv", write_predictions_csv(preds, model.labels)}};
    }
    case JobKind::kClfTrain: {
      const auto corpus = load_corpus(p.at("corpus_id"), true);
      const auto report = classifier::validate_labeled_corpus(corpus);
      if (!report.ok()) {
        throw Error(ErrorCode::kValidationFailed, report.failures.front(), "corpus_id");
      }
      const auto config = train_config_from(p.at("config"));
      const auto backend = classifier::backend_from_name(p.at("backend").get<std::string>());
      const auto& issue = p.at("issue_name").get_ref<const std::string&>();
      auto [train, test] = p.at("test_corpus_id").is_null()
                               ? classifier::split_train_test(corpus, config)
                               : std::pair{corpus, load_corpus(p.at("test_corpus_id"), true)};
      classifier::ClassifierModel model;
      if (backend == classifier::Backend::kReferenceLinear) {
        model = classifier::train_reference(train, test, config, textprep::PrepConfig{});
      } else {
        if (options_.transformer_endpoint.empty()) {
          throw Error(ErrorCode::kBackendUnavailable,
                      "no external-transformer endpoint configured");
        }
        model = classifier::train_external(options_.transformer_endpoint, issue, train, test,
                                           config);
      }
      model.issue_name = issue;
      model.model_id = p.at("model_id").is_null()
                           ? "clf-" + sha256_hex(classifier::encode_model(model)).substr(0, 16)
                           : p.at("model_id").get<std::string>();
      const auto bytes = classifier::encode_model(model);
      try {
        registry_.add(model);
      } catch (const Error& e) {
        // A re-run after a crash finds its own model already registered.
        if (e.code() != ErrorCode::kDuplicateModelId ||
            registry_.read_artifact(model.model_id) != bytes) {
          throw;
        }
      }
      return {{"eval_report.json", pretty(eval_report(model, report.warnings))},
              {"model.bin", bytes}};
    }
  }
  throw Error(ErrorCode::kInvalidParams, "unknown job kind", "kind");
}

}  // namespace framekit::jobs
