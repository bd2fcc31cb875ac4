#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pme/activity_log.hpp"
#include "pme/types.hpp"

namespace pme {

enum class Metric { jaccard, cosine };

Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric m);

/// A user's distinct items before the split, and how many events produced them.
struct PreferenceProfile {
  UserId user;
  std::span<const ItemId> items;  // sorted, distinct
  std::uint32_t action_count = 0;
};

/// Profiles for every user, built from one kind of a pre-split log.
class ProfileStore {
 public:
  ProfileStore() = default;
  ProfileStore(const ActivityLog& pre, KindId kind);

  std::size_t user_count() const { return counts_.size(); }
  std::size_t item_count() const { return item_count_; }

  PreferenceProfile profile(UserId u) const {
    return {u,
            {items_.data() + offsets_[u.value], items_.data() + offsets_[u.value + 1]},
            counts_[u.value]};
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<ItemId> items_;
  std::vector<std::uint32_t> counts_;
  std::size_t item_count_ = 0;
};

std::size_t intersection_size(std::span<const ItemId> a, std::span<const ItemId> b);

/// |a ∩ b| / |a ∪ b|, 0 when both sets are empty.
double jaccard(const PreferenceProfile& a, const PreferenceProfile& b);

/// |a ∩ b| / sqrt(|a| |b|) over binary membership vectors, 0 if either is empty.
double cosine(const PreferenceProfile& a, const PreferenceProfile& b);

double similarity(Metric m, const PreferenceProfile& a, const PreferenceProfile& b);

/// Same metrics from the set sizes alone.
double similarity_from_overlap(Metric m, std::size_t shared, std::size_t size_a,
                               std::size_t size_b);

struct ScoredUser {
  UserId user;
  double similarity = 0.0;

  friend bool operator==(const ScoredUser&, const ScoredUser&) = default;
};

/// The k pool members most similar to u, by descending similarity then
/// ascending user id. Throws UsageError if k == 0 or u is in the pool.
std::vector<ScoredUser> top_k_similar(UserId u, std::span<const UserId> pool, std::size_t k,
                                      Metric metric, const ProfileStore& profiles);

/// Item-to-users inverted index over a ProfileStore, for finding every user
/// who shares at least one item with a given user without a full scan.
class OverlapIndex {
 public:
  /// Per-thread buffers for overlaps().
  struct Scratch {
    std::vector<std::uint32_t> shared;
    std::vector<UserId> touched;
  };

  explicit OverlapIndex(const ProfileStore& profiles);

  const ProfileStore& profiles() const { return *profiles_; }

  /// Fills `out` with (v, |A_u ∩ A_v|) for every v != u with a shared item,
  /// ordered by v.
  void overlaps(UserId u, Scratch& scratch,
                std::vector<std::pair<UserId, std::uint32_t>>& out) const;

  /// top_k_similar with the pool being every other user.
  std::vector<ScoredUser> top_k(UserId u, std::size_t k, Metric metric, Scratch& scratch) const;

 private:
  const ProfileStore* profiles_;
  std::vector<std::size_t> offsets_;
  std::vector<UserId> postings_;
};

}  // namespace pme
