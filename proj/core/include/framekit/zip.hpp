#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace framekit::zip {

struct Entry {
  std::string name;
  std::string data;

  friend bool operator==(const Entry&, const Entry&) = default;
};

// Uncompressed (stored) archive with entries in the given order and a fixed
// 1980-01-01 timestamp, so equal inputs give byte-identical archives.
std::string write_archive(const std::vector<Entry>& entries);

// Reads archives produced by write_archive (stored entries only), verifying
// each CRC. Throws Error(kIoError) on anything else.
std::vector<Entry> read_archive(std::string_view bytes);

}  // namespace framekit::zip
