#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "pme/errors.hpp"
#include "pme/synthgen.hpp"
#include "pme_test_support.hpp"

using namespace pme;
using namespace pme::testing;

namespace {

std::vector<SkeletonEntry> skeleton(std::vector<std::pair<std::uint32_t, Timestamp>> entries) {
  std::vector<SkeletonEntry> out;
  for (auto [u, t] : entries) out.push_back({UserId{u}, t, KindId{0}});
  return out;
}

std::vector<std::uint32_t> items_of(const ActivityLog& log) {
  std::vector<std::uint32_t> out;
  for (const auto& a : log.actions()) out.push_back(a.item.value);
  return out;
}

ActivityLog combined(const ActivityLog& pre, const ActivityLog& post) {
  std::vector<Action> all = pre.actions();
  const auto more = post.actions();
  all.insert(all.end(), more.begin(), more.end());
  return ActivityLog(pre.shared_dict(), std::move(all));
}

/// A world with distinct timestamps, everyone active before the split.
struct SmallWorld {
  MicroWorld w;
  ActivityLog log;
  SocialGraph graph;
  ActivityLog pre;
  ActivityLog post;
  Timestamp t = 0;
};

SmallWorld small_world(std::uint64_t seed, std::size_t users) {
  Rng rng(seed);
  SmallWorld s;
  s.w.users = users;
  s.w.items = 60;
  Timestamp clock = 0;
  for (int round = 0; round < 12; ++round) {
    for (std::uint32_t u = 0; u < users; ++u) {
      s.w.actions.push_back({u, static_cast<std::uint32_t>(uniform_index(rng, 60)), ++clock});
    }
  }
  for (std::uint32_t u = 0; u < users; ++u) {
    s.w.edges.emplace_back(u, (u + 1) % users);
    s.w.edges.emplace_back(u, static_cast<std::uint32_t>(uniform_index(rng, users)));
  }
  s.log = make_log(s.w.users, s.w.items, s.w.actions);
  s.graph = make_graph(s.w.users, s.w.edges);
  s.t = clock / 2;
  std::tie(s.pre, s.post) = split_at(s.log, s.t);
  return s;
}

}  // namespace

TEST(SynthProcess, Parsing) {
  EXPECT_EQ(SynthProcess::parse("ci").variant, SynthProcess::Variant::copy_influence);
  EXPECT_EQ(SynthProcess::parse("pp", 7).k, 7u);
  EXPECT_EQ(SynthProcess::parse("ee").variant, SynthProcess::Variant::external_exposure);
  const SynthProcess mix = SynthProcess::parse("mix:0.25");
  EXPECT_EQ(mix.variant, SynthProcess::Variant::mixture);
  EXPECT_DOUBLE_EQ(mix.p_copy, 0.25);
  EXPECT_EQ(SynthProcess::parse(mix.name()).p_copy, 0.25);
  EXPECT_THROW(SynthProcess::parse("mix:1.5"), UsageError);
  EXPECT_THROW(SynthProcess::parse("bass"), UsageError);
  EXPECT_THROW(SynthProcess::parse("pp", 0), UsageError);
}

TEST(Generate, SingletonWindowIsCopied) {
  const ActivityLog pre = make_log(2, 10, {{1, 7, 1}, {0, 3, 2}});
  const SocialGraph g = make_graph(2, {{0, 1}});
  const auto sk = skeleton({{0, 5}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SynthRun run = generate(pre, sk, g, SynthProcess::parse("ci"), 10, seed);
    EXPECT_EQ(items_of(run.output), std::vector<std::uint32_t>{7});
    EXPECT_EQ(run.diagnostics.fallbacks, 0u);
  }
}

TEST(Generate, EmptyWindowFallsBack) {
  const ActivityLog pre = make_log(2, 10, {{0, 3, 2}});
  const SocialGraph g = make_graph(2, {{0, 1}});
  const SynthRun run = generate(pre, skeleton({{0, 5}}), g, SynthProcess::parse("ci"), 10, 1);
  EXPECT_EQ(run.diagnostics.fallbacks, 1u);
  EXPECT_EQ(items_of(run.output), std::vector<std::uint32_t>{3});
  EXPECT_DOUBLE_EQ(run.diagnostics.fallback_rate(), 1.0);
}

TEST(Generate, ExposureFollowsPopularity) {
  // Items 0,1,2 with 1,2,7 prior actions; one fresh draw per seed.
  std::vector<RawAction> raw;
  const int counts[] = {1, 2, 7};
  for (std::uint32_t i = 0; i < 3; ++i) {
    for (int c = 0; c < counts[i]; ++c) raw.push_back({1, i, 1});
  }
  const ActivityLog pre = make_log(2, 3, raw);
  const SocialGraph g = make_graph(2, {});
  const auto sk = skeleton({{0, 5}});
  const SynthProcess ee = SynthProcess::parse("ee");
  const int draws = 100000;
  std::array<int, 3> seen{};
  for (int s = 0; s < draws; ++s) {
    ++seen[generate(pre, sk, g, ee, 10, static_cast<std::uint64_t>(s)).output.actions()[0].item.value];
  }
  const double expected[] = {0.1, 0.2, 0.7};
  double chi2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double freq = static_cast<double>(seen[i]) / draws;
    EXPECT_NEAR(freq, expected[i], 0.01);
    const double e = expected[i] * draws;
    chi2 += (seen[i] - e) * (seen[i] - e) / e;
  }
  EXPECT_LT(chi2, 13.82);  // chi-square, 2 dof, p = 0.001
}

TEST(Generate, ExposureCountsSyntheticActions) {
  // Two items with one prior action each. With feedback this is a Polya urn,
  // whose final share of item 0 is uniform on (0,1) (variance 1/12); a fixed
  // 1:1 popularity would give a binomial share with variance 1/800.
  const ActivityLog pre = make_log(2, 2, {{1, 0, 1}, {1, 1, 1}});
  const SocialGraph g = make_graph(2, {});
  std::vector<std::pair<std::uint32_t, Timestamp>> entries;
  for (Timestamp t = 5; t < 205; ++t) entries.emplace_back(0, t);
  const auto sk = skeleton(entries);
  std::vector<double> shares;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const SynthRun run = generate(pre, sk, g, SynthProcess::parse("ee"), 10, seed);
    EXPECT_EQ(run.diagnostics.exposure_draws, 200u);
    const auto items = items_of(run.output);
    shares.push_back(static_cast<double>(std::count(items.begin(), items.end(), 0u)) / 200.0);
  }
  double mean = 0.0, var = 0.0;
  for (double x : shares) mean += x / static_cast<double>(shares.size());
  for (double x : shares) var += (x - mean) * (x - mean) / static_cast<double>(shares.size() - 1);
  EXPECT_NEAR(mean, 0.5, 0.06);
  EXPECT_NEAR(var, 1.0 / 12.0, 0.025);
}

TEST(Generate, SkeletonIsPreserved) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SmallWorld s = small_world(seed, 30);
    const auto sk = skeleton_of(s.post);
    for (const char* p : {"ci", "pp", "ee", "mix:0.3"}) {
      const SynthRun run = generate(s.pre, sk, s.graph, SynthProcess::parse(p, 5), 10, seed);
      EXPECT_EQ(skeleton_of(run.output), sk) << p;
      EXPECT_EQ(run.diagnostics.generated, sk.size());
    }
  }
}

TEST(Generate, Deterministic) {
  const SmallWorld s = small_world(6, 30);
  const auto sk = skeleton_of(s.post);
  for (const char* p : {"ci", "pp", "ee", "mix:0.5"}) {
    const SynthProcess proc = SynthProcess::parse(p, 5);
    EXPECT_EQ(items_of(generate(s.pre, sk, s.graph, proc, 10, 9).output),
              items_of(generate(s.pre, sk, s.graph, proc, 10, 9).output));
  }
}

TEST(Generate, MixtureEndpointsMatchPureProcesses) {
  const SmallWorld s = small_world(7, 40);
  const auto sk = skeleton_of(s.post);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto pp = items_of(generate(s.pre, sk, s.graph, SynthProcess::parse("pp", 5), 10, seed).output);
    const auto ci = items_of(generate(s.pre, sk, s.graph, SynthProcess::parse("ci", 5), 10, seed).output);
    EXPECT_EQ(items_of(generate(s.pre, sk, s.graph, SynthProcess::parse("mix:0", 5), 10, seed).output), pp);
    EXPECT_EQ(items_of(generate(s.pre, sk, s.graph, SynthProcess::parse("mix:1", 5), 10, seed).output), ci);
  }
}

TEST(Generate, CopyInfluenceFriendsOverlapIsOne) {
  const SmallWorld s = small_world(8, 50);
  const auto sk = skeleton_of(s.post);
  for (std::size_t m : {1u, 3u, 10u}) {
    const SynthRun run = generate(s.pre, sk, s.graph, SynthProcess::parse("ci"), m, 4);
    ASSERT_EQ(run.diagnostics.fallbacks, 0u);
    const ActivityLog full = combined(s.pre, run.output);
    FeedModel feed;
    feed.m = m;
    FeedSweeper sweeper;
    for (std::uint32_t u = 0; u < s.w.users; ++u) {
      const auto friends = s.graph.friends(UserId{u});
      const std::vector<UserId> w(friends.begin(), friends.end());
      // Only generated actions are copies: subtract what the real prefix contributes.
      const OverlapCounts all = sweeper.overlap(UserId{u}, w, full, feed, KindId{0}, KindId{0});
      const OverlapCounts before = sweeper.overlap(UserId{u}, w, s.pre, feed, KindId{0}, KindId{0});
      EXPECT_EQ(all.hits - before.hits, all.actions - before.actions) << "user " << u << " m " << m;
    }
  }
}

TEST(Generate, RejectsSkeletonBeforePre) {
  const ActivityLog pre = make_log(2, 2, {{1, 0, 10}});
  const SocialGraph g = make_graph(2, {});
  EXPECT_THROW(generate(pre, skeleton({{0, 5}}), g, SynthProcess::parse("ee"), 10, 1), UsageError);
}

TEST(GenerateNetwork, ForcedEdgeOnTwoUsers) {
  NetworkSpec spec;
  spec.n_users = 2;
  spec.n_items = 10;
  spec.n_clusters = 1;
  spec.mean_degree = 0.0;
  spec.forced_edges = {{0, 1}};
  const GeneratedNetwork net = generate_network(spec);
  EXPECT_EQ(net.graph.edge_count(), 1u);
  EXPECT_TRUE(net.graph.are_friends(UserId{0}, UserId{1}));
}

TEST(GenerateNetwork, ClustersAreMoreSimilarInside) {
  NetworkSpec spec;
  spec.n_users = 50;
  spec.n_items = 100;
  spec.n_clusters = 5;
  spec.min_actions = 30;
  spec.max_actions = 40;
  spec.zipf_exponent = 1.2;
  spec.seed = 3;
  const GeneratedNetwork net = generate_network(spec);
  const ProfileStore p(net.log, KindId{0});
  double min_within = 1.0, max_cross = 0.0;
  for (std::uint32_t a = 0; a < 50; ++a) {
    for (std::uint32_t b = a + 1; b < 50; ++b) {
      const double s = jaccard(p.profile(UserId{a}), p.profile(UserId{b}));
      if (net.cluster_of[a] == net.cluster_of[b]) {
        min_within = std::min(min_within, s);
      } else {
        max_cross = std::max(max_cross, s);
      }
    }
  }
  EXPECT_GT(min_within, max_cross);
}

TEST(GenerateNetwork, HomophilyAndDeterminism) {
  NetworkSpec spec;
  spec.n_users = 500;
  spec.homophily = 0.9;
  spec.seed = 11;
  const GeneratedNetwork a = generate_network(spec);
  const GeneratedNetwork b = generate_network(spec);
  EXPECT_EQ(a.log.actions().size(), b.log.actions().size());
  EXPECT_TRUE(std::ranges::equal(a.log.actions(), b.log.actions(), [](const Action& x, const Action& y) {
    return x.user == y.user && x.item == y.item && x.time == y.time && x.kind == y.kind;
  }));
  EXPECT_EQ(a.graph.edges(), b.graph.edges());
  std::size_t inside = 0;
  for (auto [x, y] : a.graph.edges()) inside += a.cluster_of[x.value] == a.cluster_of[y.value];
  const double share = static_cast<double>(inside) / static_cast<double>(a.graph.edge_count());
  EXPECT_GT(share, 0.8);
  EXPECT_NEAR(2.0 * static_cast<double>(a.graph.edge_count()) / 500.0, spec.mean_degree, 2.0);

  spec.seed = 12;
  EXPECT_NE(generate_network(spec).graph.edges(), a.graph.edges());
}

TEST(GenerateNetwork, Validation) {
  NetworkSpec spec;
  spec.n_clusters = spec.n_items + 1;
  EXPECT_THROW(generate_network(spec), UsageError);
  spec = NetworkSpec{};
  spec.homophily = 1.5;
  EXPECT_THROW(generate_network(spec), UsageError);
  spec = NetworkSpec{};
  spec.min_actions = 10;
  spec.max_actions = 5;
  EXPECT_THROW(generate_network(spec), UsageError);
}

TEST(ValidationRun, MixtureEstimatesRiseWithCopyProbability) {
  NetworkSpec spec;
  spec.n_users = 1500;
  spec.n_items = 1500;
  spec.n_clusters = 2;
  spec.mean_degree = 10;
  spec.min_actions = 60;
  spec.max_actions = 120;
  spec.taste_spread = 1.0;
  spec.zipf_exponent = 1.5;
  spec.homophily = 0.97;
  spec.locality = 5;
  spec.shared_taste = 0.2;
  spec.seed = 5;
  const GeneratedNetwork net = generate_network(spec);
  const std::vector<SynthProcess> procs = {SynthProcess::parse("mix:0"), SynthProcess::parse("mix:0.01"),
                                           SynthProcess::parse("mix:0.1"), SynthProcess::parse("mix:0.5"),
                                           SynthProcess::parse("mix:1")};
  ValidationConfig cfg;
  cfg.n_bootstrap = 20;
  cfg.seed = 2;
  const std::vector<Timestamp> ts = {time_quantile(net.log, 0.5)};
  const ValidationResult r = validation_run(net.log, net.graph, procs, ts, 2, cfg);
  ASSERT_EQ(r.table.size(), procs.size());
  ASSERT_EQ(r.runs.size(), procs.size() * 2);
  for (std::size_t i = 1; i < r.table.size(); ++i) {
    EXPECT_GE(r.table[i].copy_influence, r.table[i - 1].copy_influence)
        << r.table[i].process << " vs " << r.table[i - 1].process;
  }
  EXPECT_GT(r.table.back().copy_influence, 0.8);
  EXPECT_GT(r.table.back().fr_overlap, 0.95);
}
