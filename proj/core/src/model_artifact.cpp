#include <bit>
#include <cstring>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "framekit/classifier.hpp"
#include "framekit/error.hpp"
#include "framekit/hash.hpp"

namespace framekit::classifier {
namespace {

static_assert(std::endian::native == std::endian::little,
              "model payloads are stored little-endian");

using nlohmann::json;

constexpr std::string_view kMagic = "FRAMEKIT";
constexpr std::size_t kPreambleSize = 8 + 4 + 4 + 8 + 8 + 32;

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

json config_to_json(const TrainConfig& c) {
  json j{{"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"test_fraction", c.test_fraction},
         {"seed", c.seed},
         {"l2_penalty", c.l2_penalty}};
  j["learning_rate"] = c.learning_rate ? json(*c.learning_rate) : json(nullptr);
  return j;
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs");
  c.batch_size = j.at("batch_size");
  c.test_fraction = j.at("test_fraction");
  c.seed = j.at("seed");
  c.l2_penalty = j.at("l2_penalty");
  if (!j.at("learning_rate").is_null()) c.learning_rate = j.at("learning_rate").get<double>();
  return c;
}

json report_to_json(const EvalReport& r) {
  json confusion = json::array();
  for (std::size_t i = 0; i < r.confusion.rows(); ++i) {
    const auto row = r.confusion.row(i);
    confusion.push_back(std::vector<std::int64_t>(row.begin(), row.end()));
  }
  return {{"accuracy", r.accuracy},     {"precision", r.precision},
          {"recall", r.recall},         {"f1", r.f1},
          {"confusion", std::move(confusion)}, {"test_size", r.test_size}};
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  r.accuracy = j.at("accuracy");
  r.precision = j.at("precision").get<std::vector<double>>();
  r.recall = j.at("recall").get<std::vector<double>>();
  r.f1 = j.at("f1").get<std::vector<double>>();
  r.test_size = j.at("test_size");
  const auto rows = j.at("confusion").get<std::vector<std::vector<std::int64_t>>>();
  r.confusion = Matrix<std::int64_t>(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "confusion matrix is not square");
    }
    for (std::size_t k = 0; k < rows.size(); ++k) r.confusion(i, k) = rows[i][k];
  }
  return r;
}

}  // namespace

std::string encode_model(const ClassifierModel& model) {
  model.validate();
  const json header{
      {"model_id", model.model_id},
      {"issue_name", model.issue_name},
      {"labels", model.labels},
      {"backend", backend_name(model.backend)},
      {"prep",
       {{"min_token_len", model.prep.min_token_len},
        {"stem_enabled", model.prep.stem_enabled},
        {"min_doc_freq", model.prep.min_doc_freq},
        {"max_doc_ratio", model.prep.max_doc_ratio},
        {"stopwords", model.prep.stopwords}}},
      {"train_config", config_to_json(model.train_config)},
      {"metrics", report_to_json(model.metrics)},
      {"epoch_losses", model.epoch_losses},
      {"vocabulary",
       {{"terms", model.feature_spec.vocabulary.terms()},
        {"doc_freq", model.feature_spec.vocabulary.doc_freq()}}},
      {"weights_shape", {model.weights.rows(), model.weights.cols()}},
      {"endpoint", model.endpoint},
      {"remote_model", model.remote_model}};
  const std::string header_text = header.dump();

  std::string payload;
  payload.reserve((model.weights.data().size() + model.feature_spec.idf.size()) * sizeof(double));
  for (const double w : model.weights.data()) put(payload, w);
  for (const double v : model.feature_spec.idf) put(payload, v);

  std::string out;
  out.reserve(kPreambleSize + header_text.size() + payload.size());
  out += kMagic;
  put<std::uint32_t>(out, kModelFormatVersion);
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, header_text.size());
  put<std::uint64_t>(out, payload.size());
  const auto digest = sha256(header_text + payload);
  out.append(reinterpret_cast<const char*>(digest.data()), digest.size());
  out += header_text;
  out += payload;
  return out;
}

ClassifierModel decode_model(std::string_view bytes, std::string_view source) {
  const auto corrupt = [&](std::string_view why) {
    return Error(ErrorCode::kCorruptModelFile, fmt::format("{}: {}", source, why));
  };
  if (bytes.size() < kPreambleSize || bytes.substr(0, kMagic.size()) != kMagic) {
    throw corrupt("not a framekit model artifact");
  }
  const auto version = get<std::uint32_t>(bytes, 8);
  if (version != kModelFormatVersion) {
    throw corrupt(fmt::format("unsupported format version {}", version));
  }
  if (get<std::uint32_t>(bytes, 12) != 0) throw corrupt("reserved field is not zero");
  const auto header_len = get<std::uint64_t>(bytes, 16);
  const auto payload_len = get<std::uint64_t>(bytes, 24);
  if (bytes.size() - kPreambleSize != header_len + payload_len) {
    throw corrupt("length fields do not match the file size");
  }
  const auto body = bytes.substr(kPreambleSize);
  const auto digest = sha256(body);
  if (std::memcmp(digest.data(), bytes.data() + 32, digest.size()) != 0) {
    throw corrupt("checksum mismatch");
  }

  try {
    const auto header = json::parse(body.substr(0, header_len));
    ClassifierModel model;
    model.model_id = header.at("model_id");
    model.issue_name = header.at("issue_name");
    model.labels = header.at("labels").get<std::vector<std::string>>();
    model.backend = backend_from_name(header.at("backend").get<std::string>());
    const auto& prep = header.at("prep");
    model.prep.min_token_len = prep.at("min_token_len");
    model.prep.stem_enabled = prep.at("stem_enabled");
    model.prep.min_doc_freq = prep.at("min_doc_freq");
    model.prep.max_doc_ratio = prep.at("max_doc_ratio");
    model.prep.stopwords = prep.at("stopwords").get<std::vector<std::string>>();
    model.train_config = config_from_json(header.at("train_config"));
    model.metrics = report_from_json(header.at("metrics"));
    model.epoch_losses = header.at("epoch_losses").get<std::vector<double>>();
    const auto& vocab = header.at("vocabulary");
    model.feature_spec.vocabulary =
        textprep::Vocabulary(vocab.at("terms").get<std::vector<std::string>>(),
                             vocab.at("doc_freq").get<std::vector<std::uint32_t>>());
    const auto shape = header.at("weights_shape").get<std::vector<std::size_t>>();
    model.endpoint = header.at("endpoint");
    model.remote_model = header.at("remote_model");

    const auto payload = body.substr(header_len);
    const std::size_t num_weights = shape.at(0) * shape.at(1);
    const std::size_t vocab_size = model.feature_spec.vocabulary.size();
    const std::size_t num_idf =
        model.backend == Backend::kReferenceLinear ? vocab_size : 0;
    if (payload.size() != (num_weights + num_idf) * sizeof(double)) {
      throw corrupt("payload size does not match the header");
    }
    model.weights = Matrix<double>(shape.at(0), shape.at(1));
    for (std::size_t i = 0; i < num_weights; ++i) {
      model.weights.data()[i] = get<double>(payload, i * sizeof(double));
    }
    model.feature_spec.idf.resize(num_idf);
    for (std::size_t i = 0; i < num_idf; ++i) {
      model.feature_spec.idf[i] = get<double>(payload, (num_weights + i) * sizeof(double));
    }
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw corrupt(fmt::format("malformed header: {}", e.what()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorruptModelFile) throw;
    throw corrupt(e.what());
  }
}

}  // namespace framekit::classifier
