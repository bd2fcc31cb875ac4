#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pme/types.hpp"

namespace pme {

/// Names behind the dense user, item and kind ids. Ids are assigned in
/// lexicographic name order so that the id order is the identifier order.
class Dictionary {
 public:
  Dictionary() = default;
  Dictionary(std::vector<std::string> users, std::vector<std::string> items,
             std::vector<std::string> kinds);

  /// Builds a dictionary whose names are the decimal ids ("0", "1", ...),
  /// zero-padded so that lexicographic order equals numeric order.
  static Dictionary numbered(std::size_t users, std::size_t items,
                             std::vector<std::string> kinds);

  std::size_t user_count() const { return users_.size(); }
  std::size_t item_count() const { return items_.size(); }
  std::size_t kind_count() const { return kinds_.size(); }

  const std::string& user_name(UserId u) const { return users_[u.value]; }
  const std::string& item_name(ItemId i) const { return items_[i.value]; }
  const std::string& kind_name(KindId k) const { return kinds_[k.value]; }

  std::optional<UserId> find_user(std::string_view name) const;
  std::optional<ItemId> find_item(std::string_view name) const;
  std::optional<KindId> find_kind(std::string_view name) const;

  /// Like find_kind but throws UsageError naming the missing kind.
  KindId kind(std::string_view name) const;

  const std::vector<std::string>& kinds() const { return kinds_; }

 private:
  std::vector<std::string> users_;
  std::vector<std::string> items_;
  std::vector<std::string> kinds_;
  std::unordered_map<std::string, std::uint32_t> user_index_;
  std::unordered_map<std::string, std::uint32_t> item_index_;
  std::unordered_map<std::string, std::uint32_t> kind_index_;
};

/// All actions of one kind, in total order, with per-user indexes.
class KindStream {
 public:
  KindStream() = default;
  KindStream(std::vector<Action> sorted_events, std::size_t user_count);

  std::span<const Action> events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  /// Positions into events() of the user's actions, ascending.
  std::span<const std::uint32_t> user_events(UserId u) const {
    return {user_events_.data() + user_offsets_[u.value],
            user_events_.data() + user_offsets_[u.value + 1]};
  }
  std::size_t user_action_count(UserId u) const {
    return user_offsets_[u.value + 1] - user_offsets_[u.value];
  }

  /// Sorted distinct items the user acted on.
  std::span<const ItemId> distinct_items(UserId u) const {
    return {distinct_.data() + distinct_offsets_[u.value],
            distinct_.data() + distinct_offsets_[u.value + 1]};
  }

  /// Number of the user's actions strictly before `t`.
  std::size_t user_count_before(UserId u, Timestamp t) const;

 private:
  std::vector<Action> events_;
  std::vector<std::size_t> user_offsets_;
  std::vector<std::uint32_t> user_events_;
  std::vector<std::size_t> distinct_offsets_;
  std::vector<ItemId> distinct_;
};

/// Immutable, time-sorted action log split into one stream per kind.
class ActivityLog {
 public:
  ActivityLog() = default;

  /// Validates ids and timestamps, then sorts and indexes the actions.
  /// Throws DataError on out-of-range ids or negative timestamps.
  ActivityLog(std::shared_ptr<const Dictionary> dict, std::vector<Action> actions);

  const Dictionary& dict() const { return *dict_; }
  const std::shared_ptr<const Dictionary>& shared_dict() const { return dict_; }

  std::size_t user_count() const { return dict_ ? dict_->user_count() : 0; }
  std::size_t item_count() const { return dict_ ? dict_->item_count() : 0; }
  std::size_t kind_count() const { return streams_.size(); }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  const KindStream& stream(KindId k) const { return streams_.at(k.value); }

  /// Every action across kinds, in total order.
  std::vector<Action> actions() const;

  /// [earliest, latest] action time, or nullopt for an empty log.
  std::optional<std::pair<Timestamp, Timestamp>> time_range() const;

 private:
  std::shared_ptr<const Dictionary> dict_;
  std::vector<KindStream> streams_;
  std::size_t size_ = 0;
};

}  // namespace pme
