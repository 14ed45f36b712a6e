#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "framekit/corpus.hpp"

namespace framekit::textprep {

// Immutable, cheaply copyable set of stopwords.
class StopwordSet {
 public:
  StopwordSet() : words_(std::make_shared<const std::unordered_set<std::string>>()) {}
  explicit StopwordSet(std::vector<std::string> words);

  // The vendored 179-word English list (resources/stopwords_en.txt).
  static StopwordSet english();
  // Raw text of the vendored list, exactly as stored in the resource file.
  static std::string_view english_resource_text();

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_->size(); }
  std::vector<std::string> sorted_words() const;

 private:
  std::shared_ptr<const std::unordered_set<std::string>> words_;
};

struct PrepConfig {
  int min_token_len = 2;
  StopwordSet stopwords = StopwordSet::english();
  bool stem_enabled = true;
  int min_doc_freq = 2;
  double max_doc_ratio = 0.5;

  // Throws Error(kInvalidConfig) naming the offending field.
  void validate() const;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  // `terms` must be strictly increasing; `doc_freq` parallel to it.
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> doc_freq);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::uint32_t>& doc_freq() const { return doc_freq_; }
  const std::string& term(std::uint32_t id) const { return terms_.at(id); }
  std::optional<std::uint32_t> id_of(std::string_view term) const;

  // SHA-256 over the newline-joined term list.
  std::string hash() const;

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> doc_freq_;
  std::unordered_map<std::string, std::uint32_t> term_to_id_;
};

struct TokenizedCorpus {
  std::vector<std::vector<std::uint32_t>> docs;
  Vocabulary vocabulary;
  std::vector<std::size_t> empty_doc_ids;

  std::size_t total_tokens() const;
};

// Lowercases and splits on every code point that is not a Unicode letter
// (general category L*). Invalid UTF-8 bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

// Drops stopwords and tokens shorter than min_token_len code points.
std::vector<std::string> filter_tokens(const std::vector<std::string>& tokens,
                                       const PrepConfig& config);

// Porter stemmer. Tokens containing anything other than ASCII a-z are
// returned unchanged.
std::string stem(std::string_view token);

// tokenize -> filter_tokens -> stem (when enabled).
std::vector<std::string> normalize(std::string_view text, const PrepConfig& config);

TokenizedCorpus build_tokenized_corpus(const Corpus& corpus, const PrepConfig& config);

// Encodes texts against a fixed vocabulary; out-of-vocabulary terms are
// dropped. Used at prediction time.
std::vector<std::vector<std::uint32_t>> encode(const std::vector<std::string>& texts,
                                               const Vocabulary& vocabulary,
                                               const PrepConfig& config);

}  // namespace framekit::textprep
