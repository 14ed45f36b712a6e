#include <algorithm>

#include "framekit/textprep.hpp"

namespace framekit::textprep {

namespace detail {
extern const std::string_view kEnglishStopwordsText;
}  // namespace detail

StopwordSet::StopwordSet(std::vector<std::string> words)
    : words_(std::make_shared<const std::unordered_set<std::string>>(
          std::make_move_iterator(words.begin()), std::make_move_iterator(words.end()))) {}

StopwordSet StopwordSet::english() {
  static const StopwordSet kEnglish = [] {
    std::vector<std::string> words;
    std::string_view text = detail::kEnglishStopwordsText;
    while (!text.empty()) {
      const auto eol = text.find('\n');
      auto line = text.substr(0, eol);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) words.emplace_back(line);
      if (eol == std::string_view::npos) break;
      text.remove_prefix(eol + 1);
    }
    return StopwordSet(std::move(words));
  }();
  return kEnglish;
}

std::string_view StopwordSet::english_resource_text() {
  return detail::kEnglishStopwordsText;
}

bool StopwordSet::contains(std::string_view word) const {
  return words_->find(std::string(word)) != words_->end();
}

std::vector<std::string> StopwordSet::sorted_words() const {
  std::vector<std::string> words(words_->begin(), words_->end());
  std::sort(words.begin(), words.end());
  return words;
}

}  // namespace framekit::textprep
