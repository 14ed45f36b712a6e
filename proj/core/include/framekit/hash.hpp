#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace framekit {

std::array<std::uint8_t, 32> sha256(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);
std::string to_hex(const std::uint8_t* data, std::size_t size);

std::uint32_t crc32(std::string_view bytes);

}  // namespace framekit
