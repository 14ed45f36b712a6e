#include "framekit/zip.hpp"

#include <cstdint>
#include <cstring>

#include <fmt/format.h>

#include "framekit/error.hpp"
#include "framekit/hash.hpp"

namespace framekit::zip {
namespace {

constexpr std::uint32_t kLocalHeader = 0x04034b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kEndOfCentral = 0x06054b50;
constexpr std::uint16_t kVersion = 20;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01
constexpr std::uint16_t kDosTime = 0;

void u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_u32(std::string_view b, std::size_t at) {
  if (at + 4 > b.size()) throw Error(ErrorCode::kIoError, "truncated zip archive");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[at + i]);
  return v;
}

std::uint16_t read_u16(std::string_view b, std::size_t at) {
  if (at + 2 > b.size()) throw Error(ErrorCode::kIoError, "truncated zip archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

}  // namespace

std::string write_archive(const std::vector<Entry>& entries) {
  std::string out;
  std::string central;
  for (const auto& entry : entries) {
    const auto offset = static_cast<std::uint32_t>(out.size());
    const auto crc = crc32(entry.data);
    const auto size = static_cast<std::uint32_t>(entry.data.size());
    const auto name_len = static_cast<std::uint16_t>(entry.name.size());

    u32(out, kLocalHeader);
    u16(out, kVersion);
    u16(out, 0);  // flags
    u16(out, 0);  // stored
    u16(out, kDosTime);
    u16(out, kDosDate);
    u32(out, crc);
    u32(out, size);
    u32(out, size);
    u16(out, name_len);
    u16(out, 0);
    out += entry.name;
    out += entry.data;

    u32(central, kCentralHeader);
    u16(central, kVersion);
    u16(central, kVersion);
    u16(central, 0);
    u16(central, 0);
    u16(central, kDosTime);
    u16(central, kDosDate);
    u32(central, crc);
    u32(central, size);
    u32(central, size);
    u16(central, name_len);
    u16(central, 0);  // extra
    u16(central, 0);  // comment
    u16(central, 0);  // disk
    u16(central, 0);  // internal attributes
    u32(central, 0);  // external attributes
    u32(central, offset);
    central += entry.name;
  }
  const auto central_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  u32(out, kEndOfCentral);
  u16(out, 0);
  u16(out, 0);
  u16(out, static_cast<std::uint16_t>(entries.size()));
  u16(out, static_cast<std::uint16_t>(entries.size()));
  u32(out, static_cast<std::uint32_t>(central.size()));
  u32(out, central_offset);
  u16(out, 0);
  return out;
}

std::vector<Entry> read_archive(std::string_view bytes) {
  std::vector<Entry> entries;
  std::size_t at = 0;
  while (at + 4 <= bytes.size() && read_u32(bytes, at) == kLocalHeader) {
    if (read_u16(bytes, at + 8) != 0) {
      throw Error(ErrorCode::kIoError, "compressed zip entries are not supported");
    }
    const auto crc = read_u32(bytes, at + 14);
    const auto size = read_u32(bytes, at + 18);
    const auto name_len = read_u16(bytes, at + 26);
    const auto extra_len = read_u16(bytes, at + 28);
    const auto name_at = at + 30;
    const auto data_at = name_at + name_len + extra_len;
    if (data_at + size > bytes.size()) throw Error(ErrorCode::kIoError, "truncated zip archive");
    Entry entry{std::string(bytes.substr(name_at, name_len)),
                std::string(bytes.substr(data_at, size))};
    if (crc32(entry.data) != crc) {
      throw Error(ErrorCode::kIoError, fmt::format("CRC mismatch in zip entry {}", entry.name));
    }
    entries.push_back(std::move(entry));
    at = data_at + size;
  }
  if (at + 4 > bytes.size() ||
      (read_u32(bytes, at) != kCentralHeader && read_u32(bytes, at) != kEndOfCentral)) {
    throw Error(ErrorCode::kIoError, "not a zip archive");
  }
  // Archives written here carry no comment, so the end record closes the file.
  if (bytes.size() < at + 22) throw Error(ErrorCode::kIoError, "truncated zip archive");
  const auto end = bytes.size() - 22;
  if (read_u32(bytes, end) != kEndOfCentral || read_u16(bytes, end + 10) != entries.size() ||
      read_u32(bytes, end + 16) != at || read_u32(bytes, end + 12) != end - at) {
    throw Error(ErrorCode::kIoError, "zip end-of-central-directory record is damaged");
  }
  return entries;
}

}  // namespace framekit::zip
