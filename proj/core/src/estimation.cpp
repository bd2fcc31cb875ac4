#include "pme/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "pme/errors.hpp"
#include "pme/parallel.hpp"
#include "pme/random.hpp"
#include "pme/stats.hpp"

namespace pme {

namespace {

void check_phase_separation(const ActivityLog& post, const EstimateSettings& settings) {
  if (!settings.split_time) return;
  if (auto range = post.time_range(); range && range->first < *settings.split_time) {
    throw UsageError("estimation was handed actions from before the split time");
  }
}

}  // namespace

UserEstimate estimate_user(const MatchAssignment& assignment, const SocialGraph& graph,
                           const ActivityLog& post, const EstimateSettings& settings,
                           FeedSweeper& sweeper) {
  UserEstimate out;
  if (assignment.excluded) {
    out.skipped = SkipReason::excluded_by_matching;
    return out;
  }
  const UserId u = assignment.user;
  const std::size_t n_post = post.stream(settings.kinds.target).user_action_count(u);
  if (n_post == 0 || n_post < settings.min_post_actions) {
    out.skipped = SkipReason::too_few_post_actions;
    return out;
  }
  const std::vector<UserId> strangers = assignment.strangers();
  const auto friends = sweeper.overlap(u, graph.friends(u), post, settings.feed,
                                       settings.kinds.exposure, settings.kinds.target);
  const auto similar = sweeper.overlap(u, strangers, post, settings.feed, settings.kinds.exposure,
                                       settings.kinds.target);
  OverlapRecord r;
  r.user = u;
  r.friends_overlap = friends.fraction();
  r.strangers_overlap = similar.fraction();
  r.copy_influence_raw = r.friends_overlap - r.strangers_overlap;
  r.copy_influence_clamped = std::max(0.0, r.copy_influence_raw);
  r.n_post_actions = static_cast<std::uint32_t>(n_post);
  r.coverage = assignment.coverage;
  out.record = r;
  return out;
}

EstimationResult estimate_all(std::span<const MatchAssignment> assignments,
                              const SocialGraph& graph, const ActivityLog& post,
                              const EstimateSettings& settings, std::size_t workers) {
  settings.feed.validate();
  check_phase_separation(post, settings);
  std::vector<UserEstimate> slots(assignments.size());
  std::vector<FeedSweeper> sweepers;
  const std::size_t n_workers = resolve_workers(workers);
  sweepers.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) sweepers.emplace_back(post.user_count());
  parallel_for(assignments.size(), n_workers, [&](std::size_t i, std::size_t w) {
    slots[i] = estimate_user(assignments[i], graph, post, settings, sweepers[w]);
  });

  EstimationResult result;
  for (const auto& s : slots) {
    if (s.record) {
      result.records.push_back(*s.record);
    } else if (s.skipped == SkipReason::excluded_by_matching) {
      ++result.excluded_by_matching;
    } else {
      ++result.too_few_post_actions;
    }
  }
  return result;
}

double bootstrap_se(std::span<const double> values, std::size_t n_bootstrap, std::uint64_t seed,
                    std::size_t workers) {
  if (values.empty() || n_bootstrap < 2) return 0.0;
  std::vector<double> means(n_bootstrap);
  parallel_for(
      n_bootstrap, workers,
      [&](std::size_t b, std::size_t) {
        Rng rng(derive_seed(seed, "bootstrap", b));
        double sum = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) sum += values[uniform_index(rng, values.size())];
        means[b] = sum / static_cast<double>(values.size());
      },
      64);
  return sample_stddev(means);
}

EstimateSummary network_estimate(std::span<const OverlapRecord> records, std::size_t n_bootstrap,
                                 std::uint64_t seed, std::size_t workers) {
  if (records.size() < 2) throw UsageError("network estimate needs at least two user records");
  EstimateSummary s;
  s.n_users = records.size();
  s.n_bootstrap = n_bootstrap;
  std::vector<double> raw;
  raw.reserve(records.size());
  std::size_t zero_friends = 0;
  std::size_t nonpositive = 0;
  double fo = 0.0, so = 0.0, clamped = 0.0;
  for (const auto& r : records) {
    raw.push_back(r.copy_influence_raw);
    fo += r.friends_overlap;
    so += r.strangers_overlap;
    clamped += r.copy_influence_clamped;
    if (r.friends_overlap == 0.0) ++zero_friends;
    if (r.copy_influence_raw <= 0.0) ++nonpositive;
  }
  const double n = static_cast<double>(records.size());
  s.mean_friends_overlap = fo / n;
  s.mean_strangers_overlap = so / n;
  s.mean_copy_influence_raw = mean_of(raw);
  s.mean_copy_influence_clamped = clamped / n;
  s.fraction_zero_friends_overlap = static_cast<double>(zero_friends) / n;
  s.fraction_nonpositive_influence = static_cast<double>(nonpositive) / n;
  s.bootstrap_se = bootstrap_se(raw, n_bootstrap, seed, workers);
  return s;
}

PerUserSe per_user_se(UserId u, std::size_t n_repeats, const Matcher& matcher,
                      const SocialGraph& graph, const ActivityLog& post,
                      const EstimateSettings& settings, std::uint64_t seed) {
  if (n_repeats < 2) throw UsageError("per-user SE needs at least two repeats");
  check_phase_separation(post, settings);
  PerUserSe out;
  MatchScratch scratch;
  FeedSweeper sweeper(post.user_count());
  for (std::size_t r = 0; r < n_repeats; ++r) {
    const MatchAssignment a = matcher.match(u, derive_seed(seed, "per_user_se", r), scratch);
    const UserEstimate e = estimate_user(a, graph, post, settings, sweeper);
    if (!e.record) {
      ++out.missing;
      continue;
    }
    out.estimates.push_back(e.record->copy_influence_raw);
  }
  out.completed = out.estimates.size();
  if (out.completed >= 2) {
    out.se = sample_stddev(out.estimates) / std::sqrt(static_cast<double>(out.completed));
  }
  return out;
}

std::vector<ActivityBin> susceptibility_by_activity(std::span<const OverlapRecord> records,
                                                    std::span<const std::uint32_t> bin_edges,
                                                    std::size_t min_users,
                                                    std::size_t n_bootstrap, std::uint64_t seed) {
  if (bin_edges.size() < 2) throw UsageError("need at least two bin edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i - 1] < bin_edges[i])) throw UsageError("bin edges must strictly increase");
  }
  std::vector<ActivityBin> out;
  std::vector<double> values;
  for (std::size_t b = 0; b + 1 < bin_edges.size(); ++b) {
    values.clear();
    for (const auto& r : records) {
      if (r.n_post_actions >= bin_edges[b] && r.n_post_actions < bin_edges[b + 1]) {
        values.push_back(r.copy_influence_raw);
      }
    }
    if (values.size() < min_users || values.empty()) continue;
    ActivityBin bin;
    bin.lo = bin_edges[b];
    bin.hi = bin_edges[b + 1];
    bin.n_users = values.size();
    bin.mean_influence = mean_of(values);
    bin.se = bootstrap_se(values, n_bootstrap, derive_seed(seed, "bin", b), 1);
    out.push_back(bin);
  }
  return out;
}

}  // namespace pme
