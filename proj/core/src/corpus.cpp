#include "framekit/corpus.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "framekit/csv.hpp"
#include "framekit/error.hpp"

namespace framekit {

Corpus::Corpus(std::vector<Document> documents, std::string source_name)
    : documents_(std::move(documents)), source_name_(std::move(source_name)) {
  if (documents_.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "corpus has no documents");
  }
  has_labels_ = true;
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    auto& doc = documents_[i];
    doc.id = i;
    if (doc.label && doc.label->empty()) doc.label.reset();
    if (!doc.label) has_labels_ = false;
  }
}

std::vector<std::string> Corpus::texts() const {
  std::vector<std::string> out;
  out.reserve(documents_.size());
  for (const auto& d : documents_) out.push_back(d.text);
  return out;
}

std::map<std::string, std::size_t> Corpus::label_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : documents_) {
    if (d.label && !d.label->empty()) ++counts[*d.label];
  }
  return counts;
}

Corpus parse_corpus(std::string_view content, bool require_labels, std::string source_name) {
  constexpr std::string_view kBom = "\xEF\xBB\xBF";
  if (content.starts_with(kBom)) content.remove_prefix(kBom.size());

  const char delimiter = csv::detect_delimiter(content);
  const auto records = csv::parse(content, delimiter);
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "file is empty");
  }

  const auto& header = records.front().fields;
  const auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto example_col = column(kExampleColumn);
  if (!example_col) {
    throw Error(ErrorCode::kMissingExampleColumn,
                "header has no \"Example\" column", std::string(kExampleColumn));
  }
  const auto label_col = column(kLabelColumn);
  if (require_labels && !label_col) {
    throw Error(ErrorCode::kMissingLabelColumn,
                "header has no \"Label\" column", std::string(kLabelColumn));
  }

  std::vector<Document> documents;
  documents.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& record = records[r];
    if (record.fields.size() != header.size()) {
      throw Error(ErrorCode::kMalformedRow,
                  fmt::format("row {}: expected {} fields, found {}", record.number,
                              header.size(), record.fields.size()));
    }
    Document doc;
    doc.text = record.fields[*example_col];
    if (label_col && !record.fields[*label_col].empty()) {
      doc.label = record.fields[*label_col];
    } else if (require_labels) {
      throw Error(ErrorCode::kEmptyLabel,
                  fmt::format("row {}: empty \"Label\" cell", record.number),
                  std::string(kLabelColumn));
    }
    documents.push_back(std::move(doc));
  }
  if (documents.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "file has a header but no data rows");
  }
  return Corpus(std::move(documents), std::move(source_name));
}

std::string write_corpus_csv(const Corpus& corpus) {
  const bool any_label = std::any_of(corpus.documents().begin(), corpus.documents().end(),
                                     [](const Document& d) { return d.label.has_value(); });
  std::string out;
  if (any_label) {
    csv::append_row(out, {std::string(kExampleColumn), std::string(kLabelColumn)});
  } else {
    csv::append_row(out, {std::string(kExampleColumn)});
  }
  for (const auto& doc : corpus.documents()) {
    if (any_label) {
      csv::append_row(out, {doc.text, doc.label.value_or("")});
    } else {
      csv::append_row(out, {doc.text});
    }
  }
  return out;
}

}  // namespace framekit
