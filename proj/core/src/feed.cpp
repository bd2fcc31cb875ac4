#include "pme/feed.hpp"

#include <algorithm>
#include <string>

#include "pme/errors.hpp"

namespace pme {

FeedMode parse_feed_mode(std::string_view name) {
  if (name == "full" || name == "full-chronological") return FeedMode::full_chronological;
  if (name == "latest-per-friend") return FeedMode::latest_per_friend;
  throw UsageError("unknown feed mode '" + std::string(name) + "'");
}

std::string_view feed_mode_name(FeedMode mode) {
  return mode == FeedMode::full_chronological ? "full" : "latest-per-friend";
}

void FeedModel::validate() const {
  if (m < 1) throw UsageError("feed attention budget m must be at least 1");
}

double OverlapCounts::fraction() const {
  if (actions == 0) throw UsageError("overlap is undefined for a user without actions");
  return static_cast<double>(hits) / static_cast<double>(actions);
}

FeedSnapshot feed_before(Timestamp t, std::span<const UserId> watched, const ActivityLog& log,
                         const FeedModel& model, KindId kind) {
  model.validate();
  const KindStream& stream = log.stream(kind);
  std::vector<UserId> users(watched.begin(), watched.end());
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());

  std::vector<Action> visible;
  for (UserId w : users) {
    const auto positions = stream.user_events(w);
    // Positions are in total order, so the last `keep` before t suffice.
    auto end = std::partition_point(positions.begin(), positions.end(), [&](std::uint32_t p) {
      return stream.events()[p].time < t;
    });
    const std::size_t keep = model.mode == FeedMode::latest_per_friend ? 1 : model.m;
    auto begin = end - static_cast<std::ptrdiff_t>(std::min<std::size_t>(keep, end - positions.begin()));
    for (auto it = begin; it != end; ++it) visible.push_back(stream.events()[*it]);
  }
  std::sort(visible.begin(), visible.end(),
            [](const Action& a, const Action& b) { return ActionOrder{}(b, a); });
  if (visible.size() > model.m) visible.resize(model.m);

  FeedSnapshot snap;
  snap.source_events = std::move(visible);
  for (const Action& a : snap.source_events) snap.items.push_back(a.item);
  std::sort(snap.items.begin(), snap.items.end());
  snap.items.erase(std::unique(snap.items.begin(), snap.items.end()), snap.items.end());
  return snap;
}

FeedSweeper::FeedSweeper(std::size_t user_count) : slot_of_(user_count, -1) {}

OverlapCounts FeedSweeper::overlap(UserId u, std::span<const UserId> watched,
                                   const ActivityLog& log, const FeedModel& model,
                                   KindId exposure, KindId target) {
  model.validate();
  const KindStream& feed_stream = log.stream(exposure);
  const KindStream& own_stream = log.stream(target);
  const auto feed_events = feed_stream.events();
  const auto own_events = own_stream.events();
  const auto own = own_stream.user_events(u);

  OverlapCounts counts;
  counts.actions = own.size();
  if (own.empty()) return counts;

  if (slot_of_.size() < log.user_count()) slot_of_.assign(log.user_count(), -1);

  merged_.clear();
  std::size_t members = 0;
  for (UserId w : watched) {
    if (w == u || slot_of_[w.value] >= 0) continue;  // skip self and repeats
    slot_of_[w.value] = static_cast<std::int32_t>(members++);
    const auto positions = feed_stream.user_events(w);
    merged_.insert(merged_.end(), positions.begin(), positions.end());
  }
  std::sort(merged_.begin(), merged_.end());

  std::size_t next_event = 0;
  if (model.mode == FeedMode::full_chronological) {
    window_.assign(model.m, ItemId{});
    std::size_t head = 0;
    std::size_t filled = 0;
    for (std::uint32_t p : own) {
      const Action& a = own_events[p];
      while (next_event < merged_.size() && feed_events[merged_[next_event]].time < a.time) {
        window_[head] = feed_events[merged_[next_event]].item;
        head = (head + 1) % model.m;
        filled = std::min(filled + 1, model.m);
        ++next_event;
      }
      for (std::size_t i = 0; i < filled; ++i) {
        if (window_[i] == a.item) {
          ++counts.hits;
          break;
        }
      }
    }
  } else {
    // Recency list over watched users: front is the most recent actor.
    prev_.assign(members, -1);
    next_.assign(members, -1);
    latest_.assign(members, ItemId{});
    std::vector<bool> present(members, false);
    std::int32_t front = -1;
    for (std::uint32_t p : own) {
      const Action& a = own_events[p];
      while (next_event < merged_.size() && feed_events[merged_[next_event]].time < a.time) {
        const Action& e = feed_events[merged_[next_event]];
        const std::int32_t s = slot_of_[e.user.value];
        latest_[s] = e.item;
        if (present[s]) {
          if (front != s) {
            next_[prev_[s]] = next_[s];
            if (next_[s] >= 0) prev_[next_[s]] = prev_[s];
            prev_[s] = -1;
            next_[s] = front;
            prev_[front] = s;
            front = s;
          }
        } else {
          present[s] = true;
          prev_[s] = -1;
          next_[s] = front;
          if (front >= 0) prev_[front] = s;
          front = s;
        }
        ++next_event;
      }
      std::size_t seen = 0;
      for (std::int32_t s = front; s >= 0 && seen < model.m; s = next_[s], ++seen) {
        if (latest_[s] == a.item) {
          ++counts.hits;
          break;
        }
      }
    }
  }

  for (UserId w : watched) slot_of_[w.value] = -1;
  return counts;
}

OverlapCounts overlap(UserId u, std::span<const UserId> watched, const ActivityLog& log,
                      const FeedModel& model, KindId exposure, KindId target) {
  FeedSweeper sweeper(log.user_count());
  return sweeper.overlap(u, watched, log, model, exposure, target);
}

}  // namespace pme
