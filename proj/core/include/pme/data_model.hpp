#pragma once

#include <utility>
#include <vector>

#include "pme/activity_log.hpp"
#include "pme/social_graph.hpp"
#include "pme/types.hpp"

namespace pme {

/// Sorted set of users.
using UserSet = std::vector<UserId>;

struct SplitConfig {
  Timestamp t = 0;
  std::size_t min_actions_total = 10;
  std::size_t min_actions_each_side = 5;

  /// Throws UsageError unless t lies strictly inside the log's time range
  /// and min_actions_each_side >= 1.
  void validate(const ActivityLog& log) const;
};

/// Partitions the log at t: actions with time < t go to `first`, the rest
/// (including time == t) to `second`.
std::pair<ActivityLog, ActivityLog> split_at(const ActivityLog& log, Timestamp t);

/// Users with at least `threshold` of their declared friends present.
/// Users without a declared count are core iff they have a friend.
/// Throws DataError on a zero declared count with observed friends.
UserSet core_users(const SocialGraph& graph, double threshold);

/// Core users with enough actions of `kind` overall and on each side of cfg.t.
UserSet eligible_users(const ActivityLog& log, const SocialGraph& graph, const SplitConfig& cfg,
                       double threshold, KindId kind);

/// Timestamp below which `quantile` of all action times fall.
Timestamp time_quantile(const ActivityLog& log, double quantile);

}  // namespace pme
