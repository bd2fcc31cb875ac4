#include <gtest/gtest.h>

#include <set>

#include "pme/errors.hpp"
#include "pme/feed.hpp"
#include "pme_test_support.hpp"

using namespace pme;
using namespace pme::testing;

namespace {

// u = 0, w1 = 1, w2 = 2; items i1..i3 are 1..3.
std::vector<RawAction> example_actions() {
  return {{1, 1, 5}, {1, 3, 8}, {2, 2, 25}, {0, 1, 10}, {0, 2, 20}};
}

std::vector<std::uint32_t> item_values(const FeedSnapshot& s) {
  std::vector<std::uint32_t> out;
  for (auto i : s.items) out.push_back(i.value);
  return out;
}

FeedModel model(std::size_t m, FeedMode mode = FeedMode::full_chronological) {
  FeedModel f;
  f.m = m;
  f.mode = mode;
  return f;
}

}  // namespace

TEST(Feed, WindowExample) {
  const ActivityLog log = make_log(3, 4, example_actions());
  const std::vector<UserId> w = {UserId{1}, UserId{2}};
  const FeedSnapshot s = feed_before(10, w, log, model(2), KindId{0});
  ASSERT_EQ(s.source_events.size(), 2u);
  EXPECT_EQ(s.source_events[0].time, 8);
  EXPECT_EQ(s.source_events[0].item, ItemId{3});
  EXPECT_EQ(s.source_events[1].time, 5);
  EXPECT_EQ(s.source_events[1].item, ItemId{1});
  EXPECT_EQ(item_values(s), (std::vector<std::uint32_t>{1, 3}));
}

TEST(Feed, OverlapExample) {
  const ActivityLog log = make_log(3, 4, example_actions());
  const std::vector<UserId> w = {UserId{1}, UserId{2}};
  const OverlapCounts c = overlap(UserId{0}, w, log, model(2), KindId{0}, KindId{0});
  EXPECT_EQ(c.hits, 1u);
  EXPECT_EQ(c.actions, 2u);
  EXPECT_DOUBLE_EQ(c.fraction(), 0.5);
}

TEST(Feed, WindowOfOneShowsTheLatestItem) {
  const ActivityLog log = make_log(3, 4, example_actions());
  const std::vector<UserId> w = {UserId{1}, UserId{2}};
  EXPECT_EQ(item_values(feed_before(10, w, log, model(1), KindId{0})), (std::vector<std::uint32_t>{3}));
  EXPECT_EQ(item_values(feed_before(26, w, log, model(1), KindId{0})), (std::vector<std::uint32_t>{2}));
}

TEST(Feed, EventExactlyAtQueryTimeIsInvisible) {
  const ActivityLog log = make_log(3, 4, example_actions());
  const std::vector<UserId> w = {UserId{2}};
  EXPECT_TRUE(feed_before(25, w, log, model(5), KindId{0}).items.empty());
  EXPECT_EQ(feed_before(26, w, log, model(5), KindId{0}).items.size(), 1u);
}

TEST(Feed, LatestPerFriendKeepsOneEventPerUser) {
  const ActivityLog log = make_log(3, 4, example_actions());
  const std::vector<UserId> w = {UserId{1}, UserId{2}};
  const FeedSnapshot s = feed_before(30, w, log, model(5, FeedMode::latest_per_friend), KindId{0});
  ASSERT_EQ(s.source_events.size(), 2u);
  EXPECT_EQ(item_values(s), (std::vector<std::uint32_t>{2, 3}));
  for (const auto& e : s.source_events) EXPECT_NE(e.time, 5);
}

TEST(Feed, RepeatedItemsTakeSeparateSlots) {
  const ActivityLog log = make_log(2, 3, {{1, 1, 1}, {1, 2, 2}, {1, 2, 3}});
  const std::vector<UserId> w = {UserId{1}};
  const FeedSnapshot s = feed_before(10, w, log, model(2), KindId{0});
  EXPECT_EQ(s.source_events.size(), 2u);
  EXPECT_EQ(item_values(s), (std::vector<std::uint32_t>{2}));
}

TEST(Feed, SilentWatchersGiveZeroOverlap) {
  const ActivityLog log = make_log(3, 3, {{0, 1, 3}, {0, 2, 4}});
  const std::vector<UserId> w = {UserId{1}, UserId{2}};
  const OverlapCounts c = overlap(UserId{0}, w, log, model(10), KindId{0}, KindId{0});
  EXPECT_EQ(c.actions, 2u);
  EXPECT_EQ(c.fraction(), 0.0);
}

TEST(Feed, PerfectCopyingGivesOne) {
  std::vector<RawAction> raw;
  for (std::uint32_t k = 0; k < 30; ++k) {
    raw.push_back({1 + k % 3, k, static_cast<Timestamp>(10 * k)});
    raw.push_back({0, k, static_cast<Timestamp>(10 * k + 1)});
  }
  const ActivityLog log = make_log(4, 30, raw);
  const std::vector<UserId> w = {UserId{1}, UserId{2}, UserId{3}};
  EXPECT_EQ(overlap(UserId{0}, w, log, model(50), KindId{0}, KindId{0}).fraction(), 1.0);
}

TEST(Feed, OwnActionsNeverEnterTheFeed) {
  const ActivityLog log = make_log(2, 3, {{0, 1, 1}, {0, 1, 2}, {1, 2, 0}});
  const std::vector<UserId> with_self = {UserId{0}, UserId{1}};
  const OverlapCounts c = overlap(UserId{0}, with_self, log, model(10), KindId{0}, KindId{0});
  EXPECT_EQ(c.actions, 2u);
  EXPECT_EQ(c.hits, 0u);
}

TEST(Feed, FractionWithoutActionsThrows) {
  EXPECT_THROW((OverlapCounts{0, 0}.fraction()), UsageError);
}

TEST(Feed, ModelValidation) {
  EXPECT_THROW(model(0).validate(), UsageError);
  EXPECT_EQ(parse_feed_mode("full"), FeedMode::full_chronological);
  EXPECT_EQ(parse_feed_mode("latest-per-friend"), FeedMode::latest_per_friend);
  EXPECT_THROW(parse_feed_mode("ranked"), UsageError);
}

TEST(Feed, CrossKindExposure) {
  // Exposure kind 1 ("love") from the friend, target kind 0 from u.
  const ActivityLog log = make_log(2, 3, {{1, 1, 1, 1}, {1, 2, 2, 0}, {0, 1, 5, 0}, {0, 2, 6, 0}},
                                   {"listen", "love"});
  const std::vector<UserId> w = {UserId{1}};
  const OverlapCounts c = overlap(UserId{0}, w, log, model(10), KindId{1}, KindId{0});
  EXPECT_EQ(c.actions, 2u);
  EXPECT_EQ(c.hits, 1u);
}

TEST(Feed, SweepMatchesRescanOracle) {
  Rng rng(3);
  FeedSweeper sweeper;
  for (int trial = 0; trial < 300; ++trial) {
    const MicroWorld w = random_world(rng, 12, 400, 2);
    const ActivityLog log = make_log(w.users, w.items, w.actions, {"listen", "love"});
    const auto u = static_cast<std::uint32_t>(uniform_index(rng, w.users));
    std::set<std::uint32_t> watched;
    std::vector<UserId> ids;
    for (std::uint32_t v = 0; v < w.users; ++v) {
      if (uniform_index(rng, 2) == 0 || v == u) {
        watched.insert(v);
        ids.push_back(UserId{v});
      }
    }
    const std::size_t m = 1 + uniform_index(rng, 12);
    const FeedMode mode = trial % 2 ? FeedMode::latest_per_friend : FeedMode::full_chronological;
    const auto exposure = static_cast<std::uint32_t>(uniform_index(rng, 2));
    const auto target = static_cast<std::uint32_t>(uniform_index(rng, 2));
    const BruteOverlap want = brute_overlap(w.actions, u, watched, m, mode, exposure, target);
    const OverlapCounts got =
        sweeper.overlap(UserId{u}, ids, log, model(m, mode), KindId{exposure}, KindId{target});
    ASSERT_EQ(got.actions, want.actions) << "trial " << trial;
    ASSERT_EQ(got.hits, want.hits) << "trial " << trial;

    // Snapshots at random times, watched set excluding nobody.
    const auto t = static_cast<Timestamp>(uniform_index(rng, 2 * w.actions.size() + 2));
    std::set<std::uint32_t> items;
    for (auto i : feed_before(t, ids, log, model(m, mode), KindId{exposure}).items) items.insert(i.value);
    EXPECT_EQ(items, brute_feed(w.actions, t, watched, m, mode, exposure));
  }
}

TEST(Feed, OverlapNeverDecreasesWithBudget) {
  Rng rng(4);
  FeedSweeper sweeper;
  for (int trial = 0; trial < 100; ++trial) {
    const MicroWorld w = random_world(rng, 10, 300);
    const ActivityLog log = make_log(w.users, w.items, w.actions);
    std::vector<UserId> ids;
    for (std::uint32_t v = 1; v < w.users; ++v) ids.push_back(UserId{v});
    std::size_t last = 0;
    for (std::size_t m = 1; m <= 30; ++m) {
      const auto c = sweeper.overlap(UserId{0}, ids, log, model(m), KindId{0}, KindId{0});
      EXPECT_GE(c.hits, last);
      last = c.hits;
    }
  }
}

TEST(Feed, LaterActionsNeverChangeAnEarlierFeed) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    MicroWorld w = random_world(rng, 10, 200);
    const auto t = static_cast<Timestamp>(uniform_index(rng, 200));
    std::vector<UserId> ids;
    for (std::uint32_t v = 0; v < w.users; ++v) ids.push_back(UserId{v});
    const ActivityLog full = make_log(w.users, w.items, w.actions);
    std::vector<RawAction> early;
    for (const auto& a : w.actions) {
      if (a.time < t) early.push_back(a);
    }
    const ActivityLog cut = make_log(w.users, w.items, early);
    for (FeedMode mode : {FeedMode::full_chronological, FeedMode::latest_per_friend}) {
      const auto a = feed_before(t, ids, full, model(5, mode), KindId{0});
      const auto b = feed_before(t, ids, cut, model(5, mode), KindId{0});
      EXPECT_EQ(a.items, b.items);
      ASSERT_EQ(a.source_events.size(), b.source_events.size());
      for (std::size_t i = 0; i < a.source_events.size(); ++i) {
        EXPECT_EQ(a.source_events[i].time, b.source_events[i].time);
        EXPECT_EQ(a.source_events[i].user, b.source_events[i].user);
        EXPECT_EQ(a.source_events[i].item, b.source_events[i].item);
        EXPECT_LT(a.source_events[i].time, t);
      }
    }
  }
}
