#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "pme/parallel.hpp"
#include "pme/random.hpp"

using namespace pme;

TEST(DeriveSeed, DependsOnEveryArgument) {
  EXPECT_EQ(derive_seed(1, "match", 3), derive_seed(1, "match", 3));
  EXPECT_NE(derive_seed(1, "match", 3), derive_seed(2, "match", 3));
  EXPECT_NE(derive_seed(1, "match", 3), derive_seed(1, "bootstrap", 3));
  EXPECT_NE(derive_seed(1, "match", 3), derive_seed(1, "match", 4));
}

TEST(UniformIndex, StaysInRangeAndCoversIt) {
  Rng rng(3);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto x = uniform_index(rng, 7);
    ASSERT_LT(x, 7u);
    ++seen[x];
  }
  for (int c : seen) EXPECT_NEAR(c, 1000, 150);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(uniform_index(rng, 1), 0u);
}

TEST(Uniform01, HalfOpenUnitInterval) {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double x = uniform01(rng);
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
  }
}

class PermutationSizes : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(PermutationSizes, IsABijectionWithMatchingInverse) {
  const std::uint64_t n = GetParam();
  const KeyedPermutation p(n, 0xabcdef);
  std::vector<bool> hit(n, false);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t x = p.forward(i);
    ASSERT_LT(x, n);
    ASSERT_FALSE(hit[x]);
    hit[x] = true;
    ASSERT_EQ(p.inverse(x), i);
  }
}

INSTANTIATE_TEST_SUITE_P(Sizes, PermutationSizes, ::testing::Values(1, 2, 3, 5, 16, 17, 255, 1000, 4097));

TEST(KeyedPermutation, DifferentKeysGiveDifferentOrders) {
  const KeyedPermutation a(1000, 1), b(1000, 2);
  int same = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) same += a.forward(i) == b.forward(i);
  EXPECT_LT(same, 20);
}

TEST(KeyedPermutation, FirstPositionIsRoughlyUniform) {
  constexpr std::uint64_t n = 10;
  std::vector<int> first(n, 0);
  for (std::uint64_t key = 0; key < 20000; ++key) ++first[KeyedPermutation(n, splitmix64(key)).forward(0)];
  for (int c : first) EXPECT_NEAR(c, 2000, 250);
}

TEST(ParallelFor, FillsEverySlotOnce) {
  std::vector<int> out(1000, 0);
  parallel_for(out.size(), 4, [&](std::size_t i, std::size_t) { out[i] += static_cast<int>(i); }, 7);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i));
}

TEST(ParallelFor, RethrowsWorkerFailure) {
  EXPECT_THROW(parallel_for(100, 3,
                            [](std::size_t i, std::size_t) {
                              if (i == 57) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}
