#include "framekit/textprep.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <map>
#include <set>

#include <fmt/format.h>

#include "framekit/error.hpp"
#include "framekit/hash.hpp"

namespace framekit::textprep {
namespace {

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t length = 0;
  UBool error = false;
  U8_APPEND(buf, length, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(length));
}

std::size_t code_point_count(std::string_view s) {
  std::size_t n = 0;
  for (const char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace

void PrepConfig::validate() const {
  if (min_token_len < 1) {
    throw Error(ErrorCode::kInvalidConfig, "min_token_len must be >= 1", "min_token_len");
  }
  if (min_doc_freq < 1) {
    throw Error(ErrorCode::kInvalidConfig, "min_doc_freq must be >= 1", "min_doc_freq");
  }
  if (!(max_doc_ratio > 0.0 && max_doc_ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "max_doc_ratio must be in (0, 1]", "max_doc_ratio");
  }
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> doc_freq)
    : terms_(std::move(terms)), doc_freq_(std::move(doc_freq)) {
  if (terms_.size() != doc_freq_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "vocabulary terms and doc_freq differ in length");
  }
  term_to_id_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i > 0 && !(terms_[i - 1] < terms_[i])) {
      throw Error(ErrorCode::kInvalidConfig,
                  fmt::format("vocabulary terms not strictly sorted at '{}'", terms_[i]));
    }
    term_to_id_.emplace(terms_[i], static_cast<std::uint32_t>(i));
  }
}

std::optional<std::uint32_t> Vocabulary::id_of(std::string_view term) const {
  const auto it = term_to_id_.find(std::string(term));
  if (it == term_to_id_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::hash() const {
  std::string joined;
  for (const auto& t : terms_) {
    joined += t;
    joined.push_back('\n');
  }
  return sha256_hex(joined);
}

std::size_t TokenizedCorpus::total_tokens() const {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.size();
  return n;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c >= 0 && u_isalpha(c)) {
      append_utf8(current, u_tolower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> filter_tokens(const std::vector<std::string>& tokens,
                                       const PrepConfig& config) {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (config.stopwords.contains(token)) continue;
    if (code_point_count(token) < static_cast<std::size_t>(config.min_token_len)) continue;
    kept.push_back(token);
  }
  return kept;
}

std::vector<std::string> normalize(std::string_view text, const PrepConfig& config) {
  auto tokens = filter_tokens(tokenize(text), config);
  if (config.stem_enabled) {
    for (auto& token : tokens) token = stem(token);
  }
  return tokens;
}

TokenizedCorpus build_tokenized_corpus(const Corpus& corpus, const PrepConfig& config) {
  config.validate();
  const std::size_t num_docs = corpus.size();

  std::vector<std::vector<std::string>> normalized;
  normalized.reserve(num_docs);
  std::map<std::string, std::uint32_t> doc_freq;
  for (const auto& doc : corpus.documents()) {
    normalized.push_back(normalize(doc.text, config));
    const std::set<std::string> unique(normalized.back().begin(), normalized.back().end());
    for (const auto& term : unique) ++doc_freq[term];
  }

  const double max_df = config.max_doc_ratio * static_cast<double>(num_docs);
  std::vector<std::string> terms;
  std::vector<std::uint32_t> freqs;
  for (const auto& [term, df] : doc_freq) {
    if (df < static_cast<std::uint32_t>(config.min_doc_freq)) continue;
    if (static_cast<double>(df) > max_df) continue;
    terms.push_back(term);
    freqs.push_back(df);
  }
  if (terms.empty()) {
    throw Error(ErrorCode::kEmptyVocabulary,
                fmt::format("no term survives pruning (min_doc_freq={}, max_doc_ratio={})",
                            config.min_doc_freq, config.max_doc_ratio));
  }

  TokenizedCorpus tc;
  tc.vocabulary = Vocabulary(std::move(terms), std::move(freqs));
  tc.docs.resize(num_docs);
  for (std::size_t d = 0; d < num_docs; ++d) {
    for (const auto& term : normalized[d]) {
      if (const auto id = tc.vocabulary.id_of(term)) tc.docs[d].push_back(*id);
    }
    if (tc.docs[d].empty()) tc.empty_doc_ids.push_back(d);
  }
  return tc;
}

std::vector<std::vector<std::uint32_t>> encode(const std::vector<std::string>& texts,
                                               const Vocabulary& vocabulary,
                                               const PrepConfig& config) {
  std::vector<std::vector<std::uint32_t>> docs;
  docs.reserve(texts.size());
  for (const auto& text : texts) {
    auto& ids = docs.emplace_back();
    for (const auto& term : normalize(text, config)) {
      if (const auto id = vocabulary.id_of(term)) ids.push_back(*id);
    }
  }
  return docs;
}

}  // namespace framekit::textprep
