#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace sir {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t seed = kFnvOffset) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

/// MurmurHash3 64-bit finalizer.
constexpr std::uint64_t fmix64(std::uint64_t k) noexcept {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

/// Token hash of the feature-hash embedder; its output must never change.
/// Raw FNV-1a is not enough: its low byte depends only on the low bytes of
/// the input, so "topic2" and "topic19" style tokens share buckets mod 256.
constexpr std::uint64_t token_hash(std::string_view token) noexcept { return fmix64(fnv1a64(token)); }

/// Incremental FNV-1a with length-prefixed fields so ("ab","c") != ("a","bc").
class Hasher {
 public:
  Hasher& add(std::string_view field) {
    std::uint64_t n = field.size();
    for (int i = 0; i < 8; ++i) {
      mix(static_cast<unsigned char>(n >> (8 * i)));
    }
    for (unsigned char c : field) mix(c);
    return *this;
  }
  Hasher& add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(v >> (8 * i)));
    return *this;
  }
  Hasher& add(std::span<const float> v);
  std::uint64_t value() const noexcept { return h_; }
  std::string hex() const;

 private:
  void mix(unsigned char c) noexcept {
    h_ ^= c;
    h_ *= kFnvPrime;
  }
  std::uint64_t h_ = kFnvOffset;
};

std::string to_hex(std::uint64_t v);

}  // namespace sir
