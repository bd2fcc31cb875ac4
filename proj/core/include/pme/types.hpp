#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>

namespace pme {

/// Dense integer handle for a user, item or action kind. The tag keeps the
/// three id spaces from being mixed up at compile time.
template <class Tag>
struct Id {
  std::uint32_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}

  constexpr auto operator<=>(const Id&) const = default;
};

using UserId = Id<struct UserTag>;
using ItemId = Id<struct ItemTag>;
using KindId = Id<struct KindTag>;

/// Epoch seconds.
using Timestamp = std::int64_t;

inline constexpr Timestamp kMaxTimestamp = std::numeric_limits<Timestamp>::max();

/// One timestamped (user, item, kind) event. `seq` is the input sequence
/// number and only serves as the last tiebreak of the total order.
struct Action {
  Timestamp time = 0;
  UserId user;
  ItemId item;
  KindId kind;
  std::uint32_t seq = 0;

  friend bool operator==(const Action&, const Action&) = default;
};

/// Total order on actions: (time, user, item, seq).
struct ActionOrder {
  constexpr bool operator()(const Action& a, const Action& b) const {
    if (a.time != b.time) return a.time < b.time;
    if (a.user != b.user) return a.user < b.user;
    if (a.item != b.item) return a.item < b.item;
    return a.seq < b.seq;
  }
};

}  // namespace pme

template <class Tag>
struct std::hash<pme::Id<Tag>> {
  std::size_t operator()(const pme::Id<Tag>& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
