#include <gtest/gtest.h>

#include "pme/errors.hpp"
#include "pme/social_graph.hpp"

using namespace pme;

TEST(SocialGraph, ReversedDuplicateCollapses) {
  std::vector<std::pair<UserId, UserId>> edges = {{UserId{0}, UserId{1}}, {UserId{1}, UserId{0}}};
  SocialGraph::BuildReport report;
  const SocialGraph g(2, edges, {}, &report);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(report.duplicate_edges, 1u);
  EXPECT_TRUE(g.are_friends(UserId{0}, UserId{1}));
  EXPECT_TRUE(g.are_friends(UserId{1}, UserId{0}));
}

TEST(SocialGraph, SelfEdgesDroppedAndCounted) {
  std::vector<std::pair<UserId, UserId>> edges = {{UserId{2}, UserId{2}}, {UserId{0}, UserId{2}}};
  SocialGraph::BuildReport report;
  const SocialGraph g(3, edges, {}, &report);
  EXPECT_EQ(report.self_edges, 1u);
  EXPECT_FALSE(g.are_friends(UserId{2}, UserId{2}));
  EXPECT_EQ(g.degree(UserId{2}), 1u);
}

TEST(SocialGraph, AdjacencyIsSymmetricAndSorted) {
  std::vector<std::pair<UserId, UserId>> edges = {
      {UserId{3}, UserId{0}}, {UserId{1}, UserId{3}}, {UserId{2}, UserId{0}}, {UserId{3}, UserId{2}}};
  const SocialGraph g(4, edges);
  for (std::uint32_t u = 0; u < 4; ++u) {
    const auto f = g.friends(UserId{u});
    EXPECT_TRUE(std::is_sorted(f.begin(), f.end()));
    for (UserId v : f) EXPECT_TRUE(g.are_friends(v, UserId{u}));
  }
  EXPECT_EQ(g.edges().size(), 4u);
  for (auto [a, b] : g.edges()) EXPECT_LT(a, b);
}

TEST(SocialGraph, DeclaredDegreeBelowObservedIsRejected) {
  std::vector<std::pair<UserId, UserId>> edges = {{UserId{0}, UserId{1}}, {UserId{0}, UserId{2}}};
  EXPECT_THROW(SocialGraph(3, edges, {std::uint32_t{1}, std::nullopt, std::nullopt}), DataError);
  const SocialGraph g(3, edges, {std::uint32_t{5}, std::nullopt, std::uint32_t{1}});
  EXPECT_EQ(g.declared_degree(UserId{0}), 5u);
  EXPECT_FALSE(g.declared_degree(UserId{1}));
}

TEST(SocialGraph, OutOfRangeEndpointIsRejected) {
  std::vector<std::pair<UserId, UserId>> edges = {{UserId{0}, UserId{4}}};
  EXPECT_THROW(SocialGraph(3, edges), DataError);
}
