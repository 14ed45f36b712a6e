#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace framekit {

struct Document {
  std::size_t id = 0;
  std::string text;
  std::optional<std::string> label;

  friend bool operator==(const Document&, const Document&) = default;
};

// An ordered, non-empty collection of documents. Ids are reassigned to the
// dense range 0..D-1 in the given order on construction.
class Corpus {
 public:
  explicit Corpus(std::vector<Document> documents, std::string source_name = {});

  const std::vector<Document>& documents() const { return documents_; }
  const Document& operator[](std::size_t i) const { return documents_[i]; }
  std::size_t size() const { return documents_.size(); }
  const std::string& source_name() const { return source_name_; }

  // True iff every document carries a non-empty label.
  bool has_labels() const { return has_labels_; }

  std::vector<std::string> texts() const;
  // Documents per label, in label order. Unlabeled documents are not counted.
  std::map<std::string, std::size_t> label_counts() const;

 private:
  std::vector<Document> documents_;
  std::string source_name_;
  bool has_labels_ = false;
};

inline constexpr std::string_view kExampleColumn = "Example";
inline constexpr std::string_view kLabelColumn = "Label";

// Parses UTF-8 CSV or TSV with a header row. Text comes from the "Example"
// column, labels from an optional "Label" column (exact, case-sensitive
// header names). A leading UTF-8 BOM is ignored.
Corpus parse_corpus(std::string_view content, bool require_labels,
                    std::string source_name = {});

// Writes `Example[,Label]` CSV that parse_corpus reads back unchanged.
std::string write_corpus_csv(const Corpus& corpus);

}  // namespace framekit
