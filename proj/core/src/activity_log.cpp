#include "pme/activity_log.hpp"

#include <algorithm>
#include <string>

#include "pme/errors.hpp"

namespace pme {

namespace {

std::unordered_map<std::string, std::uint32_t> index_names(const std::vector<std::string>& names,
                                                          const char* what) {
  std::unordered_map<std::string, std::uint32_t> index;
  index.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0 && !(names[i - 1] < names[i])) {
      throw UsageError(std::string(what) + " names must be unique and sorted");
    }
    index.emplace(names[i], static_cast<std::uint32_t>(i));
  }
  return index;
}

std::vector<std::string> padded_numbers(std::size_t n) {
  const std::size_t width = std::to_string(n == 0 ? 0 : n - 1).size();
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = std::to_string(i);
    out.push_back(std::string(width - s.size(), '0') + s);
  }
  return out;
}

template <class IdT>
std::optional<IdT> lookup(const std::unordered_map<std::string, std::uint32_t>& index,
                          std::string_view name) {
  auto it = index.find(std::string(name));
  if (it == index.end()) return std::nullopt;
  return IdT{it->second};
}

}  // namespace

Dictionary::Dictionary(std::vector<std::string> users, std::vector<std::string> items,
                       std::vector<std::string> kinds)
    : users_(std::move(users)), items_(std::move(items)), kinds_(std::move(kinds)) {
  user_index_ = index_names(users_, "user");
  item_index_ = index_names(items_, "item");
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    if (!kind_index_.emplace(kinds_[i], static_cast<std::uint32_t>(i)).second) {
      throw UsageError("duplicate action kind '" + kinds_[i] + "'");
    }
  }
}

Dictionary Dictionary::numbered(std::size_t users, std::size_t items,
                                std::vector<std::string> kinds) {
  return Dictionary(padded_numbers(users), padded_numbers(items), std::move(kinds));
}

std::optional<UserId> Dictionary::find_user(std::string_view name) const {
  return lookup<UserId>(user_index_, name);
}

std::optional<ItemId> Dictionary::find_item(std::string_view name) const {
  return lookup<ItemId>(item_index_, name);
}

std::optional<KindId> Dictionary::find_kind(std::string_view name) const {
  return lookup<KindId>(kind_index_, name);
}

KindId Dictionary::kind(std::string_view name) const {
  if (auto k = find_kind(name)) return *k;
  throw UsageError("unknown action kind '" + std::string(name) + "'");
}

KindStream::KindStream(std::vector<Action> sorted_events, std::size_t user_count)
    : events_(std::move(sorted_events)) {
  user_offsets_.assign(user_count + 1, 0);
  for (const Action& a : events_) ++user_offsets_[a.user.value + 1];
  for (std::size_t u = 0; u < user_count; ++u) user_offsets_[u + 1] += user_offsets_[u];

  user_events_.resize(events_.size());
  std::vector<std::size_t> cursor(user_offsets_.begin(), user_offsets_.end() - 1);
  for (std::size_t i = 0; i < events_.size(); ++i) {
    user_events_[cursor[events_[i].user.value]++] = static_cast<std::uint32_t>(i);
  }

  distinct_offsets_.assign(user_count + 1, 0);
  distinct_.reserve(events_.size());
  std::vector<ItemId> scratch;
  for (std::size_t u = 0; u < user_count; ++u) {
    scratch.clear();
    for (std::size_t p = user_offsets_[u]; p < user_offsets_[u + 1]; ++p) {
      scratch.push_back(events_[user_events_[p]].item);
    }
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    distinct_.insert(distinct_.end(), scratch.begin(), scratch.end());
    distinct_offsets_[u + 1] = distinct_.size();
  }
  distinct_.shrink_to_fit();
}

std::size_t KindStream::user_count_before(UserId u, Timestamp t) const {
  auto positions = user_events(u);
  auto it = std::partition_point(positions.begin(), positions.end(),
                                 [&](std::uint32_t p) { return events_[p].time < t; });
  return static_cast<std::size_t>(it - positions.begin());
}

ActivityLog::ActivityLog(std::shared_ptr<const Dictionary> dict, std::vector<Action> actions)
    : dict_(std::move(dict)), size_(actions.size()) {
  if (!dict_) throw UsageError("activity log needs a dictionary");
  const std::size_t users = dict_->user_count();
  const std::size_t items = dict_->item_count();
  const std::size_t kinds = dict_->kind_count();

  std::vector<std::vector<Action>> by_kind(kinds);
  for (const Action& a : actions) {
    if (a.user.value >= users || a.item.value >= items || a.kind.value >= kinds) {
      throw DataError("action references an unknown user, item or kind");
    }
    if (a.time < 0) throw DataError("action has a negative timestamp");
    by_kind[a.kind.value].push_back(a);
  }
  actions.clear();
  actions.shrink_to_fit();

  streams_.reserve(kinds);
  for (auto& events : by_kind) {
    std::sort(events.begin(), events.end(), ActionOrder{});
    streams_.emplace_back(std::move(events), users);
  }
}

std::vector<Action> ActivityLog::actions() const {
  std::vector<Action> out;
  out.reserve(size_);
  for (const auto& s : streams_) out.insert(out.end(), s.events().begin(), s.events().end());
  std::sort(out.begin(), out.end(), [](const Action& a, const Action& b) {
    if (ActionOrder{}(a, b)) return true;
    if (ActionOrder{}(b, a)) return false;
    return a.kind < b.kind;
  });
  return out;
}

std::optional<std::pair<Timestamp, Timestamp>> ActivityLog::time_range() const {
  std::optional<std::pair<Timestamp, Timestamp>> range;
  for (const auto& s : streams_) {
    if (s.size() == 0) continue;
    const Timestamp lo = s.events().front().time;
    const Timestamp hi = s.events().back().time;
    if (!range) {
      range.emplace(lo, hi);
    } else {
      range->first = std::min(range->first, lo);
      range->second = std::max(range->second, hi);
    }
  }
  return range;
}

}  // namespace pme
