#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pme/random.hpp"
#include "pme/stats.hpp"

using namespace pme;

TEST(Summarize, SmallSample) {
  const std::vector<double> v = {1, 2, 3};
  const Summary s = summarize(v);
  EXPECT_EQ(s.n, 3u);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.median, 2.0);
  EXPECT_DOUBLE_EQ(s.std_error, 1.0 / std::sqrt(3.0));
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 3.0);
}

TEST(Summarize, SingleValueHasZeroError) {
  const std::vector<double> v = {4.5};
  const Summary s = summarize(v);
  EXPECT_EQ(s.std_error, 0.0);
  EXPECT_EQ(s.median, 4.5);
}

TEST(Summarize, EvenCountMedianAveragesMiddlePair) {
  const std::vector<double> v = {7, 1, 3, 5};
  EXPECT_DOUBLE_EQ(summarize(v).median, 4.0);
}

TEST(Summarize, EmptyIsAllZero) {
  const Summary s = summarize({});
  EXPECT_EQ(s.n, 0u);
  EXPECT_EQ(s.mean, 0.0);
}

TEST(Summarize, MeanAndMedianWithinRange) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + uniform_index(rng, 40));
    for (double& x : v) x = uniform01(rng) * 100.0 - 50.0;
    const Summary s = summarize(v);
    EXPECT_LE(s.min, s.mean);
    EXPECT_LE(s.mean, s.max);
    EXPECT_LE(s.min, s.median);
    EXPECT_LE(s.median, s.max);
  }
}

TEST(SampleStddev, UsesNMinusOne) {
  const std::vector<double> v = {0, 1};
  EXPECT_DOUBLE_EQ(sample_stddev(v), std::sqrt(0.5));
  EXPECT_EQ(sample_stddev(std::vector<double>{3}), 0.0);
}
