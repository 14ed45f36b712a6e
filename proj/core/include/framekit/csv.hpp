#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace framekit::csv {

struct Record {
  std::vector<std::string> fields;
  // 1-based line the record starts on; the header is line 1.
  std::size_t number = 0;
};

// RFC 4180 reader. Quoted fields may contain delimiters, doubled quotes and
// line breaks. CRLF and LF terminators are both accepted; completely empty
// lines are skipped. Throws Error(kMalformedRow) on an unterminated quote or
// on stray characters after a closing quote.
std::vector<Record> parse(std::string_view text, char delimiter);

// Picks ',' or '\t' by counting unquoted occurrences on the first line.
char detect_delimiter(std::string_view text);

// Quotes the field only when it contains the delimiter, a quote, CR or LF.
std::string escape_field(std::string_view field, char delimiter = ',');

void append_row(std::string& out, const std::vector<std::string>& fields,
                char delimiter = ',');

}  // namespace framekit::csv
