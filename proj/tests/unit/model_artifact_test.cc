#include <cstring>

#include <gtest/gtest.h>

#include "framekit/classifier.hpp"
#include "framekit/error.hpp"
#include "framekit/registry.hpp"
#include "test_support.hpp"

namespace framekit::classifier {
namespace {

ClassifierModel small_model() {
  const auto corpus = framekit::testing::separable_labeled_corpus(20, 4);
  auto [train, test] = split_train_test(corpus, TrainConfig{});
  auto model = train_reference(train, test, TrainConfig{}, textprep::PrepConfig{});
  model.model_id = "small";
  model.issue_name = "Economy vs health";
  return model;
}

void expect_same(const ClassifierModel& a, const ClassifierModel& b) {
  EXPECT_EQ(a.model_id, b.model_id);
  EXPECT_EQ(a.issue_name, b.issue_name);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.backend, b.backend);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.feature_spec.idf, b.feature_spec.idf);
  EXPECT_EQ(a.feature_spec.vocabulary.terms(), b.feature_spec.vocabulary.terms());
  EXPECT_EQ(a.feature_spec.vocabulary.doc_freq(), b.feature_spec.vocabulary.doc_freq());
  EXPECT_EQ(a.train_config, b.train_config);
  EXPECT_EQ(a.epoch_losses, b.epoch_losses);
  EXPECT_EQ(a.metrics.accuracy, b.metrics.accuracy);
  EXPECT_EQ(a.metrics.confusion, b.metrics.confusion);
  EXPECT_EQ(a.prep.stopwords, b.prep.stopwords);
  EXPECT_EQ(a.prep.max_doc_ratio, b.prep.max_doc_ratio);
}

ErrorCode decode_error(std::string_view bytes, std::string* message = nullptr) {
  try {
    decode_model(bytes, "m.fkm");
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "decoded";
  return ErrorCode::kIoError;
}

TEST(ModelArtifact, RoundTripIsExact) {
  const auto model = small_model();
  const auto bytes = encode_model(model);
  EXPECT_EQ(bytes.substr(0, 8), "FRAMEKIT");
  const auto decoded = decode_model(bytes);
  expect_same(decoded, model);
  EXPECT_EQ(encode_model(decoded), bytes);
}

TEST(ModelArtifact, ExternalModelRoundTrip) {
  ClassifierModel model;
  model.model_id = "remote";
  model.labels = {"a", "b"};
  model.backend = Backend::kExternalTransformer;
  model.endpoint = "http://127.0.0.1:9/engine";
  model.remote_model = "handle-7";
  const auto decoded = decode_model(encode_model(model));
  EXPECT_EQ(decoded.endpoint, model.endpoint);
  EXPECT_EQ(decoded.remote_model, "handle-7");
  EXPECT_TRUE(decoded.weights.empty());
}

TEST(ModelArtifact, DetectsTampering) {
  const auto bytes = encode_model(small_model());
  std::string message;

  auto flipped = bytes;
  flipped[bytes.size() - 3] ^= 0x01;
  EXPECT_EQ(decode_error(flipped, &message), ErrorCode::kCorruptModelFile);
  EXPECT_NE(message.find("m.fkm"), std::string::npos);
  EXPECT_NE(message.find("checksum"), std::string::npos);

  EXPECT_EQ(decode_error(bytes.substr(0, bytes.size() - 1)), ErrorCode::kCorruptModelFile);
  EXPECT_EQ(decode_error(""), ErrorCode::kCorruptModelFile);
  EXPECT_EQ(decode_error("NOTAMODEL" + bytes.substr(9)), ErrorCode::kCorruptModelFile);

  auto version = bytes;
  version[8] = 2;
  EXPECT_EQ(decode_error(version, &message), ErrorCode::kCorruptModelFile);
  EXPECT_NE(message.find("version"), std::string::npos);
}

TEST(ModelArtifactProperty, SingleByteCorruptionNeverDecodesSilently) {
  const auto bytes = encode_model(small_model());
  for (std::size_t i = 0; i < bytes.size(); i += 1 + bytes.size() / 400) {
    auto bad = bytes;
    bad[i] = static_cast<char>(bad[i] ^ 0x5a);
    EXPECT_EQ(decode_error(bad), ErrorCode::kCorruptModelFile) << "offset " << i;
  }
}

TEST(ClassifierModel, ValidateInvariants) {
  auto model = small_model();
  EXPECT_NO_THROW(model.validate());
  auto bad = model;
  bad.labels = {"Health", "Economy"};
  EXPECT_THROW(bad.validate(), Error);
  bad = model;
  bad.weights = Matrix<double>(3, model.weights.cols());
  EXPECT_THROW(bad.validate(), Error);
  bad = model;
  bad.labels = {"Economy"};
  EXPECT_THROW(bad.validate(), Error);
}

}  // namespace
}  // namespace framekit::classifier
