#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace framekit::detail {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames over `path`. With `durable` the
// file and its directory are fsynced before returning.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes, bool durable);

}  // namespace framekit::detail
