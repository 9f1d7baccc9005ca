#pragma once

#include <cstdint>
#include <string_view>

namespace ecorag {

// 64-bit FNV-1a. When a seed is given, its eight little-endian bytes are
// hashed before the payload so distinct seeds give unrelated streams.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0) {
  std::uint64_t h = 14695981039346656037ULL;
  constexpr std::uint64_t prime = 1099511628211ULL;
  if (seed != 0) {
    for (int i = 0; i < 8; ++i) {
      h ^= static_cast<std::uint8_t>(seed >> (8 * i));
      h *= prime;
    }
  }
  for (unsigned char c : bytes) {
    h ^= c;
    h *= prime;
  }
  return h;
}

// SplitMix64: tiny deterministic generator owned by this project so that
// shuffles and weight init do not depend on standard-library internals.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Multiply-shift; bias is negligible for the
  // small n used here and the mapping is platform-independent.
  std::size_t next_below(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  template <typename T>
  void shuffle(T& seq) {
    for (std::size_t i = seq.size(); i > 1; --i) {
      std::size_t j = next_below(i);
      std::swap(seq[i - 1], seq[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace ecorag
