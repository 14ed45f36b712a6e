#include "framekit/uuid.hpp"

#include <mutex>
#include <random>

#include "framekit/hash.hpp"
#include "framekit/rng.hpp"

namespace framekit {

std::string make_uuid() {
  static std::mutex mutex;
  static Xoshiro256 rng([] {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }());
  std::uint8_t bytes[16];
  {
    const std::lock_guard lock(mutex);
    const auto hi = rng.next();
    const auto lo = rng.next();
    for (int i = 0; i < 8; ++i) {
      bytes[i] = static_cast<std::uint8_t>(hi >> (56 - 8 * i));
      bytes[8 + i] = static_cast<std::uint8_t>(lo >> (56 - 8 * i));
    }
  }
  bytes[6] = static_cast<std::uint8_t>((bytes[6] & 0x0f) | 0x40);
  bytes[8] = static_cast<std::uint8_t>((bytes[8] & 0x3f) | 0x80);
  const auto hex = to_hex(bytes, 16);
  return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) + "-" +
         hex.substr(16, 4) + "-" + hex.substr(20);
}

bool is_uuid(std::string_view text) {
  if (text.size() != 36) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (i == 8 || i == 13 || i == 18 || i == 23) {
      if (c != '-') return false;
    } else if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
      return false;
    }
  }
  return true;
}

}  // namespace framekit
