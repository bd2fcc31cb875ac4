#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pme/feed.hpp"
#include "pme/matching.hpp"

namespace pme {

/// Exposure kind feeds the feed; target kind is what u's copy-actions are.
struct KindPair {
  KindId exposure;
  KindId target;
};

struct EstimateSettings {
  FeedModel feed;
  KindPair kinds;
  std::size_t min_post_actions = 1;
  /// When set, the post-split log must not contain earlier actions.
  std::optional<Timestamp> split_time;
};

struct OverlapRecord {
  UserId user;
  double friends_overlap = 0.0;
  double strangers_overlap = 0.0;
  double copy_influence_raw = 0.0;
  double copy_influence_clamped = 0.0;
  std::uint32_t n_post_actions = 0;
  double coverage = 0.0;

  friend bool operator==(const OverlapRecord&, const OverlapRecord&) = default;
};

enum class SkipReason { excluded_by_matching, too_few_post_actions };

struct UserEstimate {
  std::optional<OverlapRecord> record;
  std::optional<SkipReason> skipped;
};

/// Friends-Overlap against all of u's friends, Strangers-Overlap against the
/// matched strangers, both with the same feed model and kinds.
UserEstimate estimate_user(const MatchAssignment& assignment, const SocialGraph& graph,
                           const ActivityLog& post, const EstimateSettings& settings,
                           FeedSweeper& sweeper);

struct EstimationResult {
  std::vector<OverlapRecord> records;  // in assignment order, skips removed
  std::size_t excluded_by_matching = 0;
  std::size_t too_few_post_actions = 0;
};

EstimationResult estimate_all(std::span<const MatchAssignment> assignments,
                              const SocialGraph& graph, const ActivityLog& post,
                              const EstimateSettings& settings, std::size_t workers = 0);

struct EstimateSummary {
  std::size_t n_users = 0;
  double mean_friends_overlap = 0.0;
  double mean_strangers_overlap = 0.0;
  double mean_copy_influence_raw = 0.0;
  double mean_copy_influence_clamped = 0.0;
  double bootstrap_se = 0.0;
  std::size_t n_bootstrap = 0;
  double fraction_zero_friends_overlap = 0.0;
  double fraction_nonpositive_influence = 0.0;
};

/// Standard deviation (n-1) of the mean over `n_bootstrap` resamples of
/// `values` with replacement. Deterministic under `seed`.
double bootstrap_se(std::span<const double> values, std::size_t n_bootstrap, std::uint64_t seed,
                    std::size_t workers = 0);

/// Network-level means over the records with a bootstrap SE of the raw
/// copy-influence mean. Throws UsageError with fewer than two records.
EstimateSummary network_estimate(std::span<const OverlapRecord> records,
                                 std::size_t n_bootstrap = 1000, std::uint64_t seed = 0,
                                 std::size_t workers = 0);

struct PerUserSe {
  std::optional<double> se;  // unset with fewer than two completed repeats
  std::size_t completed = 0;
  std::size_t missing = 0;
  std::vector<double> estimates;
};

/// Spread of u's raw copy-influence over `n_repeats` fresh matchings:
/// sample SD / sqrt(completed). Repeats where u ends up excluded or
/// without post actions count as missing.
PerUserSe per_user_se(UserId u, std::size_t n_repeats, const Matcher& matcher,
                      const SocialGraph& graph, const ActivityLog& post,
                      const EstimateSettings& settings, std::uint64_t seed);

struct ActivityBin {
  std::uint32_t lo = 0;  // inclusive
  std::uint32_t hi = 0;  // exclusive
  std::size_t n_users = 0;
  double mean_influence = 0.0;
  double se = 0.0;
};

/// Users binned by post-split activity; bins with fewer than `min_users`
/// users are dropped. Throws UsageError unless edges strictly increase.
std::vector<ActivityBin> susceptibility_by_activity(std::span<const OverlapRecord> records,
                                                    std::span<const std::uint32_t> bin_edges,
                                                    std::size_t min_users = 5,
                                                    std::size_t n_bootstrap = 1000,
                                                    std::uint64_t seed = 0);

}  // namespace pme
