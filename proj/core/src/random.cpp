#include "pme/random.hpp"

namespace pme {

KeyedPermutation::KeyedPermutation(std::uint64_t n, std::uint64_t key)
    : n_(n), key_(splitmix64(key)) {
  while ((std::uint64_t{1} << (2 * half_bits_)) < n_) ++half_bits_;
  half_mask_ = (std::uint64_t{1} << half_bits_) - 1;
}

std::uint64_t KeyedPermutation::encrypt(std::uint64_t x) const {
  std::uint64_t left = x >> half_bits_;
  std::uint64_t right = x & half_mask_;
  for (int r = 0; r < kRounds; ++r) {
    const std::uint64_t next = left ^ round(r, right);
    left = right;
    right = next;
  }
  return (left << half_bits_) | right;
}

std::uint64_t KeyedPermutation::decrypt(std::uint64_t x) const {
  std::uint64_t left = x >> half_bits_;
  std::uint64_t right = x & half_mask_;
  for (int r = kRounds - 1; r >= 0; --r) {
    const std::uint64_t prev = right ^ round(r, left);
    right = left;
    left = prev;
  }
  return (left << half_bits_) | right;
}

std::uint64_t KeyedPermutation::forward(std::uint64_t pos) const {
  std::uint64_t x = encrypt(pos);
  while (x >= n_) x = encrypt(x);
  return x;
}

std::uint64_t KeyedPermutation::inverse(std::uint64_t element) const {
  std::uint64_t x = decrypt(element);
  while (x >= n_) x = decrypt(x);
  return x;
}

}  // namespace pme
