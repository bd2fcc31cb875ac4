// Throughput of the hot paths on generated networks.
#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <vector>

#include "pme/data_model.hpp"
#include "pme/estimation.hpp"
#include "pme/feed.hpp"
#include "pme/harness.hpp"
#include "pme/matching.hpp"
#include "pme/similarity.hpp"
#include "pme/synthgen.hpp"

namespace {

using namespace pme;

NetworkSpec bench_spec(std::size_t n_users) {
  NetworkSpec spec;
  spec.n_users = n_users;
  spec.n_items = 4 * n_users;
  spec.n_clusters = 20;
  spec.mean_degree = 10.0;
  spec.min_actions = 60;
  spec.max_actions = 120;
  spec.zipf_exponent = 1.4;
  spec.shared_taste = 0.07;
  spec.locality = 5;
  spec.seed = 3;
  return spec;
}

// Networks are cached per size; generation is benchmarked separately.
const GeneratedNetwork& world(std::size_t n_users) {
  static std::map<std::size_t, std::unique_ptr<GeneratedNetwork>> cache;
  auto& slot = cache[n_users];
  if (!slot) slot = std::make_unique<GeneratedNetwork>(generate_network(bench_spec(n_users)));
  return *slot;
}

struct Prepared {
  Timestamp t;
  ActivityLog pre;
  ActivityLog post;
  KindId kind;
};

Prepared prepare(const GeneratedNetwork& net) {
  const Timestamp t = time_quantile(net.log, 0.5);
  auto [pre, post] = split_at(net.log, t);
  const KindId kind = net.log.dict().kind("love");
  return {t, std::move(pre), std::move(post), kind};
}

void BM_GenerateNetwork(benchmark::State& state) {
  const NetworkSpec spec = bench_spec(static_cast<std::size_t>(state.range(0)));
  std::size_t actions = 0;
  for (auto _ : state) {
    GeneratedNetwork net = generate_network(spec);
    actions = net.log.size();
    benchmark::DoNotOptimize(net.log.size());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * actions));
}
BENCHMARK(BM_GenerateNetwork)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Jaccard(benchmark::State& state) {
  const GeneratedNetwork& net = world(2000);
  const Prepared p = prepare(net);
  const ProfileStore profiles(p.pre, p.kind);
  const std::size_t n = profiles.user_count();
  std::size_t i = 0;
  for (auto _ : state) {
    const UserId a{static_cast<std::uint32_t>(i % n)};
    const UserId b{static_cast<std::uint32_t>((i * 7919 + 1) % n)};
    benchmark::DoNotOptimize(jaccard(profiles.profile(a), profiles.profile(b)));
    ++i;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_Jaccard);

void BM_OverlapIndexTopK(benchmark::State& state) {
  const GeneratedNetwork& net = world(static_cast<std::size_t>(state.range(0)));
  const Prepared p = prepare(net);
  const ProfileStore profiles(p.pre, p.kind);
  const OverlapIndex index(profiles);
  OverlapIndex::Scratch scratch;
  std::uint32_t u = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.top_k(UserId{u}, 10, Metric::jaccard, scratch));
    u = (u + 1) % static_cast<std::uint32_t>(profiles.user_count());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_OverlapIndexTopK)->Arg(2000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_FeedSweep(benchmark::State& state) {
  const GeneratedNetwork& net = world(2000);
  const Prepared p = prepare(net);
  FeedModel model;
  model.m = static_cast<std::size_t>(state.range(0));
  FeedSweeper sweeper(p.post.user_count());
  const std::uint32_t n = static_cast<std::uint32_t>(p.post.user_count());
  std::uint32_t u = 0;
  std::size_t events = 0;
  for (auto _ : state) {
    const auto friends = net.graph.friends(UserId{u});
    const OverlapCounts c = sweeper.overlap(UserId{u}, friends, p.post, model, p.kind, p.kind);
    benchmark::DoNotOptimize(c.hits);
    events += c.actions;
    for (UserId f : friends) events += p.post.stream(p.kind).user_action_count(f);
    u = (u + 1) % n;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(events));
}
BENCHMARK(BM_FeedSweep)->Arg(10)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_MatchUser(benchmark::State& state) {
  const GeneratedNetwork& net = world(static_cast<std::size_t>(state.range(0)));
  const Prepared p = prepare(net);
  const ProfileStore profiles(p.pre, p.kind);
  SplitConfig split;
  split.t = p.t;
  const UserSet eligible = eligible_users(net.log, net.graph, split, 0.75, p.kind);
  MatchConfig cfg;
  cfg.rng_seed = 5;
  const Matcher matcher(net.graph, profiles, eligible, cfg);
  MatchScratch scratch;
  std::size_t i = 0;
  for (auto _ : state) {
    const UserId u = eligible[i % eligible.size()];
    benchmark::DoNotOptimize(matcher.match(u, cfg.rng_seed, scratch).coverage);
    ++i;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_MatchUser)->Arg(2000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_Pipeline(benchmark::State& state) {
  const GeneratedNetwork& net = world(static_cast<std::size_t>(state.range(0)));
  PipelineConfig cfg;
  cfg.t = time_quantile(net.log, 0.5);
  cfg.exposure_kind = "love";
  cfg.n_bootstrap = 200;
  cfg.seed = 1;
  cfg.workers = 1;
  for (auto _ : state) {
    const PipelineResult r = run_pipeline(net.log, net.graph, cfg);
    benchmark::DoNotOptimize(r.mean_coverage);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * net.log.size()));
}
BENCHMARK(BM_Pipeline)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_BootstrapSe(benchmark::State& state) {
  std::vector<double> values(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i % 97) / 97.0;
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_se(values, 1000, 9));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 1000 * values.size()));
}
BENCHMARK(BM_BootstrapSe)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SynthGenerate(benchmark::State& state) {
  const GeneratedNetwork& net = world(2000);
  const Prepared p = prepare(net);
  const auto skeleton = skeleton_of(p.post, p.kind);
  const SynthProcess process = SynthProcess::parse(state.range(0) == 0 ? "ci" : "pp");
  for (auto _ : state) {
    const SynthRun run = generate(p.pre, skeleton, net.graph, process, 10, 4);
    benchmark::DoNotOptimize(run.output.size());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * skeleton.size()));
}
BENCHMARK(BM_SynthGenerate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
