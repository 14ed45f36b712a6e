#include "framekit/lda.hpp"

#include <cmath>

#include <fmt/format.h>

#include "framekit/error.hpp"

namespace framekit::lda {

void LdaConfig::validate() const {
  if (num_topics < 2) {
    throw Error(ErrorCode::kInvalidConfig, "num_topics must be >= 2", "num_topics");
  }
  if (iterations < 1) {
    throw Error(ErrorCode::kInvalidConfig, "iterations must be >= 1", "iterations");
  }
  if (alpha && !(*alpha > 0.0 && std::isfinite(*alpha))) {
    throw Error(ErrorCode::kInvalidConfig, "alpha must be > 0", "alpha");
  }
  if (!(beta > 0.0 && std::isfinite(beta))) {
    throw Error(ErrorCode::kInvalidConfig, "beta must be > 0", "beta");
  }
  if (keyword_count < 1) {
    throw Error(ErrorCode::kInvalidConfig, "keyword_count must be >= 1", "keyword_count");
  }
}

std::size_t TopicModel::dominant_topic(std::size_t d) const {
  const auto row = theta.row(d);
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k) {
    if (row[k] > row[best]) best = k;
  }
  return best;
}

GibbsSampler::GibbsSampler(const TokenizedCorpus& corpus, const LdaConfig& config)
    : corpus_(corpus),
      config_(config),
      num_topics_(static_cast<std::size_t>(config.num_topics)),
      vocab_size_(corpus.vocabulary.size()),
      alpha_(config.effective_alpha()),
      beta_(config.beta),
      rng_(config.seed) {
  config_.validate();
  if (vocab_size_ == 0) {
    throw Error(ErrorCode::kEmptyVocabulary, "vocabulary is empty");
  }
  if (corpus.total_tokens() == 0) {
    throw Error(ErrorCode::kAllDocumentsEmpty, "every document is empty");
  }

  topic_word_ = Matrix<std::int32_t>(num_topics_, vocab_size_);
  doc_topic_ = Matrix<std::int32_t>(corpus.docs.size(), num_topics_);
  topic_totals_.assign(num_topics_, 0);
  weights_.assign(num_topics_, 0.0);
  z_.resize(corpus.docs.size());

  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    const auto& doc = corpus.docs[d];
    z_[d].resize(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto w = doc[i];
      if (w >= vocab_size_) {
        throw Error(ErrorCode::kDimensionMismatch,
                    fmt::format("document {} has token id {} >= V={}", d, w, vocab_size_));
      }
      const auto k = static_cast<std::int32_t>(rng_.below(num_topics_));
      z_[d][i] = k;
      ++topic_word_(k, w);
      ++doc_topic_(d, k);
      ++topic_totals_[k];
    }
  }
}

void GibbsSampler::sweep() {
  const double v_beta = static_cast<double>(vocab_size_) * beta_;
  for (std::size_t d = 0; d < corpus_.docs.size(); ++d) {
    const auto& doc = corpus_.docs[d];
    auto doc_counts = doc_topic_.row(d);
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto w = doc[i];
      const auto old_topic = z_[d][i];
      --topic_word_(old_topic, w);
      --doc_counts[old_topic];
      --topic_totals_[old_topic];

      double total = 0.0;
      for (std::size_t k = 0; k < num_topics_; ++k) {
        total += (doc_counts[k] + alpha_) * (topic_word_(k, w) + beta_) /
                 (static_cast<double>(topic_totals_[k]) + v_beta);
        weights_[k] = total;
      }
      const double u = rng_.uniform() * total;
      std::size_t new_topic = num_topics_ - 1;
      for (std::size_t k = 0; k < num_topics_; ++k) {
        if (u < weights_[k]) {
          new_topic = k;
          break;
        }
      }

      z_[d][i] = static_cast<std::int32_t>(new_topic);
      ++topic_word_(new_topic, w);
      ++doc_counts[new_topic];
      ++topic_totals_[new_topic];
    }
  }
  ++iterations_done_;
}

double GibbsSampler::log_likelihood() const {
  const double k_alpha = static_cast<double>(num_topics_) * alpha_;
  const double v_beta = static_cast<double>(vocab_size_) * beta_;
  const double lgamma_alpha = std::lgamma(alpha_);
  const double lgamma_beta = std::lgamma(beta_);

  double ll = 0.0;
  for (std::size_t k = 0; k < num_topics_; ++k) {
    ll += std::lgamma(v_beta) - std::lgamma(static_cast<double>(topic_totals_[k]) + v_beta);
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      const auto n = topic_word_(k, w);
      if (n > 0) ll += std::lgamma(n + beta_) - lgamma_beta;
    }
  }
  for (std::size_t d = 0; d < corpus_.docs.size(); ++d) {
    const auto length = static_cast<double>(corpus_.docs[d].size());
    ll += std::lgamma(k_alpha) - std::lgamma(length + k_alpha);
    for (std::size_t k = 0; k < num_topics_; ++k) {
      const auto n = doc_topic_(d, k);
      if (n > 0) ll += std::lgamma(n + alpha_) - lgamma_alpha;
    }
  }
  return ll;
}

TopicModel GibbsSampler::snapshot(std::vector<LikelihoodCheckpoint> trace) const {
  TopicModel model;
  model.config = config_;
  model.terms = corpus_.vocabulary.terms();
  model.vocabulary_hash = corpus_.vocabulary.hash();
  model.topic_word_counts = topic_word_;
  model.doc_topic_counts = doc_topic_;
  model.assignments = z_;
  model.empty_doc_ids = corpus_.empty_doc_ids;
  model.log_likelihood_trace = std::move(trace);

  const double v_beta = static_cast<double>(vocab_size_) * beta_;
  model.phi = Matrix<double>(num_topics_, vocab_size_);
  for (std::size_t k = 0; k < num_topics_; ++k) {
    const double denom = static_cast<double>(topic_totals_[k]) + v_beta;
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      model.phi(k, w) = (topic_word_(k, w) + beta_) / denom;
    }
  }

  const double k_alpha = static_cast<double>(num_topics_) * alpha_;
  const double uniform = 1.0 / static_cast<double>(num_topics_);
  model.theta = Matrix<double>(corpus_.docs.size(), num_topics_);
  for (std::size_t d = 0; d < corpus_.docs.size(); ++d) {
    const auto length = corpus_.docs[d].size();
    for (std::size_t k = 0; k < num_topics_; ++k) {
      model.theta(d, k) = length == 0
                              ? uniform
                              : (doc_topic_(d, k) + alpha_) /
                                    (static_cast<double>(length) + k_alpha);
    }
  }
  return model;
}

TopicModel train_lda(const TokenizedCorpus& corpus, const LdaConfig& config) {
  GibbsSampler sampler(corpus, config);
  std::vector<LikelihoodCheckpoint> trace;
  trace.push_back({0, sampler.log_likelihood()});
  for (int it = 1; it <= config.iterations; ++it) {
    sampler.sweep();
    if (it % kLikelihoodInterval == 0 || it == config.iterations) {
      trace.push_back({it, sampler.log_likelihood()});
    }
  }
  return sampler.snapshot(std::move(trace));
}

}  // namespace framekit::lda
