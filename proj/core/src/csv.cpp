#include "framekit/csv.hpp"

#include <fmt/format.h>

#include "framekit/error.hpp"

namespace framekit::csv {

std::vector<Record> parse(std::string_view text, char delimiter) {
  std::vector<Record> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool after_quote = false;  // just closed a quoted field
  bool row_has_content = false;
  std::size_t line = 1;        // physical line of the current character
  std::size_t record_line = 1;  // line the current record started on

  auto finish_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    after_quote = false;
  };
  auto finish_record = [&] {
    if (row_has_content) {
      finish_field();
      current.number = record_line;
      records.push_back(std::move(current));
    }
    record_line = line;
    current = Record{};
    field.clear();
    row_has_content = false;
    after_quote = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == delimiter) {
      row_has_content = true;
      finish_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++line;
      finish_record();
    } else if (c == '"' && field.empty() && !after_quote) {
      in_quotes = true;
      row_has_content = true;
    } else if (after_quote) {
      throw Error(ErrorCode::kMalformedRow,
                  fmt::format("row {}: unexpected character after closing quote",
                              record_line));
    } else {
      field.push_back(c);
      row_has_content = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::kMalformedRow,
                fmt::format("row {}: unterminated quoted field", record_line));
  }
  finish_record();
  return records;
}

char detect_delimiter(std::string_view text) {
  std::size_t commas = 0;
  std::size_t tabs = 0;
  bool in_quotes = false;
  for (const char c : text) {
    if (c == '"') in_quotes = !in_quotes;
    if (in_quotes) continue;
    if (c == '\n' || c == '\r') break;
    if (c == ',') ++commas;
    if (c == '\t') ++tabs;
  }
  return tabs > commas ? '\t' : ',';
}

std::string escape_field(std::string_view field, char delimiter) {
  const bool needs_quotes =
      field.find_first_of(std::string{delimiter, '"', '\r', '\n'}) != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void append_row(std::string& out, const std::vector<std::string>& fields,
                char delimiter) {
  // A lone empty field would otherwise produce a blank line, which readers skip.
  if (fields.size() == 1 && fields[0].empty()) {
    out += "\"\"\n";
    return;
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.push_back(delimiter);
    out += escape_field(fields[i], delimiter);
  }
  out.push_back('\n');
}

}  // namespace framekit::csv
