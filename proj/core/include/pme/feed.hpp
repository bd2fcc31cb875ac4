#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "pme/activity_log.hpp"

namespace pme {

enum class FeedMode {
  full_chronological,  // the M latest events of the watched users
  latest_per_friend,   // each watched user's latest event, then the M latest of those
};

FeedMode parse_feed_mode(std::string_view name);
std::string_view feed_mode_name(FeedMode mode);

struct FeedModel {
  std::size_t m = 10;
  FeedMode mode = FeedMode::full_chronological;

  void validate() const;
};

struct FeedSnapshot {
  std::vector<ItemId> items;         // distinct, sorted
  std::vector<Action> source_events; // newest first, at most m
};

/// What a feed over the users `watched` showed just before `t`: only actions
/// of `kind` strictly earlier than `t` are visible.
FeedSnapshot feed_before(Timestamp t, std::span<const UserId> watched, const ActivityLog& log,
                         const FeedModel& model, KindId kind);

struct OverlapCounts {
  std::size_t hits = 0;
  std::size_t actions = 0;

  /// hits / actions; throws UsageError when there are no actions.
  double fraction() const;
};

/// Replays u's `target` actions in `log` against the feed built from the
/// `watched` users' `exposure` actions, counting actions whose item was on
/// the feed at that moment. u's own actions never enter the feed.
///
/// One merged chronological sweep per call with a window of m events, so
/// the cost is linear in the watched users' activity plus u's.
class FeedSweeper {
 public:
  explicit FeedSweeper(std::size_t user_count = 0);

  OverlapCounts overlap(UserId u, std::span<const UserId> watched, const ActivityLog& log,
                        const FeedModel& model, KindId exposure, KindId target);

 private:
  std::vector<std::uint32_t> merged_;
  std::vector<ItemId> window_;
  std::vector<std::int32_t> slot_of_;
  std::vector<std::int32_t> prev_;
  std::vector<std::int32_t> next_;
  std::vector<ItemId> latest_;
};

/// Convenience wrapper that allocates a FeedSweeper per call.
OverlapCounts overlap(UserId u, std::span<const UserId> watched, const ActivityLog& log,
                      const FeedModel& model, KindId exposure, KindId target);

}  // namespace pme
