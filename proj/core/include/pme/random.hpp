#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pme {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a, 64-bit. Stable across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Child seed for (stage, index) under a parent seed. Depends only on its
/// arguments, so adding or reordering work never shifts other streams.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view stage,
                                    std::uint64_t index = 0) {
  return splitmix64(splitmix64(parent ^ fnv1a(stage)) + splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform integer in [0, n); n must be positive. Lemire's multiply-shift
/// with rejection, so results do not depend on the standard library.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  std::uint64_t x = rng();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = rng();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Keyed pseudo-random bijection on [0, n): a balanced Feistel network over
/// the next even power of two, with cycle walking back into range. Both
/// directions are O(1) expected, so a caller can find where any element
/// lands in the shuffled order without materialising the shuffle.
class KeyedPermutation {
 public:
  KeyedPermutation(std::uint64_t n, std::uint64_t key);

  std::uint64_t size() const { return n_; }

  /// Element at shuffled position `pos`.
  std::uint64_t forward(std::uint64_t pos) const;
  /// Shuffled position of `element`.
  std::uint64_t inverse(std::uint64_t element) const;

 private:
  static constexpr int kRounds = 6;

  std::uint64_t encrypt(std::uint64_t x) const;
  std::uint64_t decrypt(std::uint64_t x) const;
  std::uint64_t round(int r, std::uint64_t half) const {
    return splitmix64(key_ ^ (static_cast<std::uint64_t>(r) * 0xd1b54a32d192ed03ULL) ^ half) &
           half_mask_;
  }

  std::uint64_t n_;
  std::uint64_t key_;
  int half_bits_ = 1;
  std::uint64_t half_mask_ = 1;
};

}  // namespace pme
