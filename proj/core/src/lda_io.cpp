#include <nlohmann/json.hpp>

#include <fmt/format.h>

#include "framekit/error.hpp"
#include "framekit/lda.hpp"

namespace framekit::lda {
namespace {

constexpr std::string_view kFormat = "framekit-lda-model";
constexpr int kFormatVersion = 1;

using nlohmann::json;

template <typename T>
json matrix_to_json(const Matrix<T>& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

template <typename T>
Matrix<T> matrix_from_json(const json& j) {
  Matrix<T> m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  auto data = j.at("data").get<std::vector<T>>();
  if (data.size() != m.rows() * m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix data length does not match its shape");
  }
  m.data() = std::move(data);
  return m;
}

}  // namespace

std::string save_model(const TopicModel& model) {
  json config{{"num_topics", model.config.num_topics},
              {"seed", model.config.seed},
              {"iterations", model.config.iterations},
              {"alpha", model.config.effective_alpha()},
              {"alpha_is_default", !model.config.alpha.has_value()},
              {"beta", model.config.beta},
              {"keyword_count", model.config.keyword_count}};
  json trace = json::array();
  for (const auto& c : model.log_likelihood_trace) {
    trace.push_back({{"iteration", c.iteration}, {"log_likelihood", c.log_likelihood}});
  }
  json doc{{"format", kFormat},
           {"version", kFormatVersion},
           {"config", std::move(config)},
           {"vocabulary_hash", model.vocabulary_hash},
           {"terms", model.terms},
           {"empty_doc_ids", model.empty_doc_ids},
           {"topic_word_counts", matrix_to_json(model.topic_word_counts)},
           {"doc_topic_counts", matrix_to_json(model.doc_topic_counts)},
           {"assignments", model.assignments},
           {"phi", matrix_to_json(model.phi)},
           {"theta", matrix_to_json(model.theta)},
           {"log_likelihood_trace", std::move(trace)}};
  return doc.dump();
}

TopicModel load_model(std::string_view json_text) {
  try {
    const auto doc = json::parse(json_text);
    if (doc.at("format") != kFormat) {
      throw Error(ErrorCode::kCorruptModelFile, "not an LDA model artifact");
    }
    if (doc.at("version") != kFormatVersion) {
      throw Error(ErrorCode::kCorruptModelFile,
                  fmt::format("unsupported LDA model version {}", doc.at("version").dump()));
    }
    TopicModel model;
    const auto& c = doc.at("config");
    model.config.num_topics = c.at("num_topics");
    model.config.seed = c.at("seed");
    model.config.iterations = c.at("iterations");
    if (!c.at("alpha_is_default").get<bool>()) model.config.alpha = c.at("alpha").get<double>();
    model.config.beta = c.at("beta");
    model.config.keyword_count = c.at("keyword_count");
    model.vocabulary_hash = doc.at("vocabulary_hash");
    model.terms = doc.at("terms").get<std::vector<std::string>>();
    model.empty_doc_ids = doc.at("empty_doc_ids").get<std::vector<std::size_t>>();
    model.topic_word_counts = matrix_from_json<std::int32_t>(doc.at("topic_word_counts"));
    model.doc_topic_counts = matrix_from_json<std::int32_t>(doc.at("doc_topic_counts"));
    model.assignments = doc.at("assignments").get<std::vector<std::vector<std::int32_t>>>();
    model.phi = matrix_from_json<double>(doc.at("phi"));
    model.theta = matrix_from_json<double>(doc.at("theta"));
    for (const auto& t : doc.at("log_likelihood_trace")) {
      model.log_likelihood_trace.push_back({t.at("iteration"), t.at("log_likelihood")});
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptModelFile, fmt::format("malformed LDA model: {}", e.what()));
  }
}

}  // namespace framekit::lda
