#include "sir/hash.hpp"

#include <bit>
#include <cstring>

namespace sir {

Hasher& Hasher::add(std::span<const float> v) {
  add(static_cast<std::uint64_t>(v.size()));
  for (float f : v) {
    auto bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) mix(static_cast<unsigned char>(bits >> (8 * i)));
  }
  return *this;
}

std::string Hasher::hex() const { return to_hex(h_); }

std::string to_hex(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace sir
