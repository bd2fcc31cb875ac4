#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pme/data_model.hpp"
#include "pme/similarity.hpp"

namespace pme {

struct MatchConfig {
  double eps_s = 0.1;
  double eps_a = 0.1;
  std::uint64_t rng_seed = 0;
  /// Stop sampling after this many pool members; unset means the whole pool.
  std::optional<std::size_t> max_candidates;
  /// Users whose matched fraction of friends falls below this are excluded.
  double coverage_required = 1.0;
  Metric metric = Metric::jaccard;

  void validate() const;
};

struct MatchPair {
  UserId friend_user;
  UserId stranger;
  double sim_friend = 0.0;
  double sim_stranger = 0.0;
  std::uint32_t count_friend = 0;
  std::uint32_t count_stranger = 0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct MatchAssignment {
  UserId user;
  std::vector<MatchPair> pairs;  // ascending friend id
  std::size_t friend_count = 0;
  double coverage = 0.0;
  bool excluded = false;
  std::size_t candidates_examined = 0;
  bool cap_hit = false;

  std::vector<UserId> strangers() const;
  std::optional<UserId> stranger_for(UserId friend_user) const;
};

/// |sim_candidate - sim_friend| <= eps * sim_friend; a zero-similarity
/// friend only accepts a zero-similarity candidate.
bool similarity_matches(double sim_friend, double sim_candidate, double eps);

/// |count_candidate - count_friend| <= eps * count_friend.
bool activity_matches(std::uint32_t count_friend, std::uint32_t count_candidate, double eps);

/// Per-thread buffers for Matcher.
struct MatchScratch {
  OverlapIndex::Scratch overlap;
  std::vector<std::pair<UserId, std::uint32_t>> shared;
  std::vector<std::pair<std::uint64_t, std::uint32_t>> queue;  // (position, payload)
};

/// Matching phase: for each friend of a user, a non-friend from the pool of
/// eligible users whose similarity to the user and pre-split activity are
/// both within tolerance of the friend's.
///
/// Candidates are drawn without replacement in the order of a keyed
/// pseudo-random permutation of the pool, seeded per user. Each candidate is
/// tested against every unmatched friend and given to the one with the
/// closest similarity (lowest id on ties). Sampling stops when every friend
/// is matched, the pool is exhausted, or max_candidates is reached.
class Matcher {
 public:
  Matcher(const SocialGraph& graph, const ProfileStore& profiles, UserSet eligible,
          MatchConfig cfg);

  const MatchConfig& config() const { return cfg_; }
  const UserSet& eligible() const { return eligible_; }
  const OverlapIndex& index() const { return index_; }

  MatchAssignment match(UserId u) const;
  /// Same, with the per-user stream derived from `seed` instead of cfg.rng_seed.
  MatchAssignment match(UserId u, std::uint64_t seed, MatchScratch& scratch) const;

  /// Walks the full permutation one candidate at a time. Produces the same
  /// pairs as match(); kept as the straightforward reference and used when
  /// the fast path's preconditions (eps_s < 1, no candidate cap) fail.
  MatchAssignment match_reference(UserId u, std::uint64_t seed) const;

  /// Independent per-user assignments, in the order of `users`.
  std::vector<MatchAssignment> match_all(std::span<const UserId> users,
                                         std::size_t workers = 0) const;

 private:
  struct FriendState {
    UserId id;
    double sim;
    std::uint32_t count;
    bool matched = false;
  };

  std::uint64_t user_key(UserId u, std::uint64_t seed) const;
  void finish(MatchAssignment& out, const std::vector<FriendState>& friends,
              const std::vector<UserId>& strangers) const;
  std::pair<std::uint32_t, std::uint32_t> activity_range(std::uint32_t count_friend) const;
  std::size_t eligible_with_count_in(std::uint32_t lo, std::uint32_t hi) const;

  const SocialGraph* graph_;
  const ProfileStore* profiles_;
  OverlapIndex index_;
  UserSet eligible_;
  MatchConfig cfg_;
  std::vector<std::int64_t> eligible_slot_;   // user -> index in eligible_, or -1
  std::vector<std::uint32_t> by_count_;       // eligible indices sorted by (count, id)
  std::vector<std::uint32_t> sorted_counts_;  // counts in by_count_ order
};

/// One-shot convenience over Matcher.
MatchAssignment match_strangers(UserId u, const SocialGraph& graph, const ProfileStore& profiles,
                                const UserSet& eligible, const MatchConfig& cfg);

std::vector<MatchAssignment> match_all(std::span<const UserId> users, const SocialGraph& graph,
                                       const ProfileStore& profiles, const UserSet& eligible,
                                       const MatchConfig& cfg, std::size_t workers = 0);

}  // namespace pme
