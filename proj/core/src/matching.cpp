#include "pme/matching.hpp"

#include <algorithm>
#include <cmath>

#include "pme/errors.hpp"
#include "pme/parallel.hpp"
#include "pme/random.hpp"

namespace pme {

namespace {

constexpr double kRelativeSlack = 1e-12;

}  // namespace

void MatchConfig::validate() const {
  if (!(eps_s >= 0.0) || !(eps_a >= 0.0)) throw UsageError("matching tolerances must be >= 0");
  if (!(coverage_required > 0.0 && coverage_required <= 1.0)) {
    throw UsageError("coverage_required must lie in (0, 1]");
  }
  if (max_candidates && *max_candidates == 0) throw UsageError("max_candidates must be positive");
}

std::vector<UserId> MatchAssignment::strangers() const {
  std::vector<UserId> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.stranger);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<UserId> MatchAssignment::stranger_for(UserId friend_user) const {
  auto it = std::lower_bound(pairs.begin(), pairs.end(), friend_user,
                             [](const MatchPair& p, UserId f) { return p.friend_user < f; });
  if (it == pairs.end() || it->friend_user != friend_user) return std::nullopt;
  return it->stranger;
}

bool similarity_matches(double sim_friend, double sim_candidate, double eps) {
  if (sim_friend == 0.0) return sim_candidate == 0.0;
  return std::abs(sim_candidate - sim_friend) <= (eps + kRelativeSlack) * sim_friend;
}

bool activity_matches(std::uint32_t count_friend, std::uint32_t count_candidate, double eps) {
  const double diff = std::abs(static_cast<double>(count_candidate) - static_cast<double>(count_friend));
  return diff <= (eps + kRelativeSlack) * static_cast<double>(count_friend);
}

Matcher::Matcher(const SocialGraph& graph, const ProfileStore& profiles, UserSet eligible,
                 MatchConfig cfg)
    : graph_(&graph),
      profiles_(&profiles),
      index_(profiles),
      eligible_(std::move(eligible)),
      cfg_(cfg) {
  cfg_.validate();
  std::sort(eligible_.begin(), eligible_.end());
  eligible_.erase(std::unique(eligible_.begin(), eligible_.end()), eligible_.end());
  eligible_slot_.assign(profiles.user_count(), -1);
  for (std::size_t i = 0; i < eligible_.size(); ++i) {
    if (eligible_[i].value >= profiles.user_count()) throw UsageError("eligible user out of range");
    eligible_slot_[eligible_[i].value] = static_cast<std::int64_t>(i);
  }
  by_count_.resize(eligible_.size());
  for (std::uint32_t i = 0; i < by_count_.size(); ++i) by_count_[i] = i;
  std::sort(by_count_.begin(), by_count_.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto ca = profiles.profile(eligible_[a]).action_count;
    const auto cb = profiles.profile(eligible_[b]).action_count;
    return ca != cb ? ca < cb : a < b;
  });
  sorted_counts_.reserve(by_count_.size());
  for (std::uint32_t i : by_count_) sorted_counts_.push_back(profiles.profile(eligible_[i]).action_count);
}

std::uint64_t Matcher::user_key(UserId u, std::uint64_t seed) const {
  return derive_seed(seed, "match", u.value);
}

std::pair<std::uint32_t, std::uint32_t> Matcher::activity_range(std::uint32_t count_friend) const {
  const double c = static_cast<double>(count_friend);
  auto lo = static_cast<std::int64_t>(std::floor(c * (1.0 - cfg_.eps_a))) - 1;
  auto hi = static_cast<std::int64_t>(std::ceil(c * (1.0 + cfg_.eps_a))) + 1;
  lo = std::max<std::int64_t>(lo, 0);
  while (!activity_matches(count_friend, static_cast<std::uint32_t>(lo), cfg_.eps_a)) ++lo;
  while (!activity_matches(count_friend, static_cast<std::uint32_t>(hi), cfg_.eps_a)) --hi;
  return {static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(hi)};
}

std::size_t Matcher::eligible_with_count_in(std::uint32_t lo, std::uint32_t hi) const {
  auto a = std::lower_bound(sorted_counts_.begin(), sorted_counts_.end(), lo);
  auto b = std::upper_bound(sorted_counts_.begin(), sorted_counts_.end(), hi);
  return static_cast<std::size_t>(b - a);
}

namespace {

struct Candidate {
  UserId id;
  double sim;
  std::uint32_t count;
};

}  // namespace

void Matcher::finish(MatchAssignment& out, const std::vector<FriendState>& friends,
                     const std::vector<UserId>& strangers) const {
  out.friend_count = friends.size();
  std::size_t matched = 0;
  for (std::size_t i = 0; i < friends.size(); ++i) {
    const FriendState& f = friends[i];
    if (!f.matched) continue;
    ++matched;
    const PreferenceProfile ps = profiles_->profile(strangers[i]);
    const PreferenceProfile pu = profiles_->profile(out.user);
    out.pairs.push_back({f.id, strangers[i], f.sim, similarity(cfg_.metric, pu, ps), f.count,
                         ps.action_count});
  }
  out.coverage = friends.empty() ? 0.0
                                 : static_cast<double>(matched) / static_cast<double>(friends.size());
  out.excluded = friends.empty() || out.coverage + kRelativeSlack < cfg_.coverage_required;
}

MatchAssignment Matcher::match(UserId u) const {
  MatchScratch scratch;
  return match(u, cfg_.rng_seed, scratch);
}

MatchAssignment Matcher::match_reference(UserId u, std::uint64_t seed) const {
  MatchAssignment out;
  out.user = u;
  const PreferenceProfile pu = profiles_->profile(u);
  const auto friend_ids = graph_->friends(u);
  std::vector<FriendState> friends;
  friends.reserve(friend_ids.size());
  for (UserId f : friend_ids) {
    const PreferenceProfile pf = profiles_->profile(f);
    friends.push_back({f, similarity(cfg_.metric, pu, pf), pf.action_count});
  }
  std::vector<UserId> strangers(friends.size());
  std::size_t unmatched = friends.size();
  const std::size_t cap = cfg_.max_candidates.value_or(eligible_.size());

  if (!eligible_.empty()) {
    const KeyedPermutation perm(eligible_.size(), user_key(u, seed));
    for (std::uint64_t pos = 0; pos < eligible_.size() && unmatched > 0; ++pos) {
      const UserId c = eligible_[perm.forward(pos)];
      if (c == u || graph_->are_friends(u, c)) continue;
      if (out.candidates_examined == cap) {
        out.cap_hit = true;
        break;
      }
      ++out.candidates_examined;
      const PreferenceProfile pc = profiles_->profile(c);
      const double sim_c = similarity(cfg_.metric, pu, pc);
      std::size_t best = friends.size();
      double best_gap = 0.0;
      for (std::size_t i = 0; i < friends.size(); ++i) {
        const FriendState& f = friends[i];
        if (f.matched || !similarity_matches(f.sim, sim_c, cfg_.eps_s) ||
            !activity_matches(f.count, pc.action_count, cfg_.eps_a)) {
          continue;
        }
        const double gap = std::abs(sim_c - f.sim);
        if (best == friends.size() || gap < best_gap) {
          best = i;
          best_gap = gap;
        }
      }
      if (best != friends.size()) {
        friends[best].matched = true;
        strangers[best] = c;
        --unmatched;
      }
    }
  }
  finish(out, friends, strangers);
  return out;
}

MatchAssignment Matcher::match(UserId u, std::uint64_t seed, MatchScratch& s) const {
  if (cfg_.eps_s >= 1.0 || cfg_.max_candidates) return match_reference(u, seed);

  MatchAssignment out;
  out.user = u;
  const auto friend_ids = graph_->friends(u);
  index_.overlaps(u, s.overlap, s.shared);
  const std::size_t size_u = profiles_->profile(u).items.size();

  auto shared_index = [&](UserId v) -> std::optional<std::size_t> {
    auto it = std::lower_bound(s.shared.begin(), s.shared.end(), v,
                               [](const auto& e, UserId x) { return e.first < x; });
    if (it == s.shared.end() || it->first != v) return std::nullopt;
    return static_cast<std::size_t>(it - s.shared.begin());
  };
  auto is_friend = [&](UserId v) {
    return std::binary_search(friend_ids.begin(), friend_ids.end(), v);
  };

  std::vector<FriendState> friends;
  friends.reserve(friend_ids.size());
  std::size_t positive_unmatched = 0;
  std::size_t zero_unmatched = 0;
  for (UserId f : friend_ids) {
    const PreferenceProfile pf = profiles_->profile(f);
    const auto idx = shared_index(f);
    const std::uint32_t n = idx ? s.shared[*idx].second : 0;
    const double sim = similarity_from_overlap(cfg_.metric, n, size_u, pf.items.size());
    friends.push_back({f, sim, pf.action_count});
    ++(sim > 0.0 ? positive_unmatched : zero_unmatched);
  }
  std::vector<UserId> strangers(friends.size());
  if (eligible_.empty() || friends.empty()) {
    finish(out, friends, strangers);
    return out;
  }
  const KeyedPermutation perm(eligible_.size(), user_key(u, seed));

  // With eps_s < 1 a positive-similarity friend only accepts positive
  // candidates and a zero-similarity friend only zero ones, so the two
  // streams can be walked separately in permutation order.
  if (positive_unmatched > 0) {
    s.queue.clear();
    for (std::size_t i = 0; i < s.shared.size(); ++i) {
      const UserId v = s.shared[i].first;
      const std::int64_t slot = eligible_slot_[v.value];
      if (slot < 0 || is_friend(v)) continue;
      s.queue.emplace_back(perm.inverse(static_cast<std::uint64_t>(slot)), static_cast<std::uint32_t>(i));
    }
    std::sort(s.queue.begin(), s.queue.end());
    for (const auto& [pos, i] : s.queue) {
      if (positive_unmatched == 0) break;
      ++out.candidates_examined;
      const UserId c = s.shared[i].first;
      const PreferenceProfile pc = profiles_->profile(c);
      const double sim_c = similarity_from_overlap(cfg_.metric, s.shared[i].second, size_u, pc.items.size());
      std::size_t best = friends.size();
      double best_gap = 0.0;
      for (std::size_t k = 0; k < friends.size(); ++k) {
        const FriendState& f = friends[k];
        if (f.matched || f.sim == 0.0 || !similarity_matches(f.sim, sim_c, cfg_.eps_s) ||
            !activity_matches(f.count, pc.action_count, cfg_.eps_a)) {
          continue;
        }
        const double gap = std::abs(sim_c - f.sim);
        if (best == friends.size() || gap < best_gap) {
          best = k;
          best_gap = gap;
        }
      }
      if (best != friends.size()) {
        friends[best].matched = true;
        strangers[best] = c;
        --positive_unmatched;
      }
    }
  }

  if (zero_unmatched > 0) {
    struct ZeroFriend {
      std::size_t index;
      std::uint32_t lo;
      std::uint32_t hi;
      std::size_t available;
    };
    // Eligible users that are not zero-similarity pool members.
    std::vector<UserId> blocked(friend_ids.begin(), friend_ids.end());
    blocked.push_back(u);
    for (const auto& e : s.shared) blocked.push_back(e.first);
    std::sort(blocked.begin(), blocked.end());
    blocked.erase(std::unique(blocked.begin(), blocked.end()), blocked.end());
    std::vector<std::uint32_t> blocked_counts;
    for (UserId v : blocked) {
      if (eligible_slot_[v.value] >= 0) blocked_counts.push_back(profiles_->profile(v).action_count);
    }
    std::sort(blocked_counts.begin(), blocked_counts.end());

    std::vector<ZeroFriend> zeros;
    std::size_t total_available = 0;
    std::size_t rarest = eligible_.size();
    for (std::size_t k = 0; k < friends.size(); ++k) {
      if (friends[k].sim != 0.0) continue;
      const auto [lo, hi] = activity_range(friends[k].count);
      const auto b0 = std::lower_bound(blocked_counts.begin(), blocked_counts.end(), lo);
      const auto b1 = std::upper_bound(blocked_counts.begin(), blocked_counts.end(), hi);
      const std::size_t available = eligible_with_count_in(lo, hi) - static_cast<std::size_t>(b1 - b0);
      if (available == 0) continue;
      zeros.push_back({k, lo, hi, available});
      total_available += available;
      rarest = std::min(rarest, available);
    }
    auto is_blocked = [&](UserId v) { return std::binary_search(blocked.begin(), blocked.end(), v); };
    auto take = [&](UserId c) {
      const std::uint32_t count_c = profiles_->profile(c).action_count;
      for (const ZeroFriend& z : zeros) {
        FriendState& f = friends[z.index];
        if (!f.matched && activity_matches(f.count, count_c, cfg_.eps_a)) {
          f.matched = true;
          strangers[z.index] = c;
          return;
        }
      }
    };

    // Materialising every candidate in range costs about total_available;
    // walking the permutation costs about N / rarest steps.
    const bool explicit_walk =
        !zeros.empty() && total_available * rarest <= 2 * eligible_.size();
    if (explicit_walk) {
      std::vector<std::pair<std::uint32_t, std::uint32_t>> spans;
      for (const ZeroFriend& z : zeros) spans.emplace_back(z.lo, z.hi);
      std::sort(spans.begin(), spans.end());
      std::vector<std::pair<std::uint32_t, std::uint32_t>> merged;
      for (const auto& sp : spans) {
        if (!merged.empty() && sp.first <= merged.back().second + 1) {
          merged.back().second = std::max(merged.back().second, sp.second);
        } else {
          merged.push_back(sp);
        }
      }
      s.queue.clear();
      for (const auto& [lo, hi] : merged) {
        auto a = std::lower_bound(sorted_counts_.begin(), sorted_counts_.end(), lo);
        auto b = std::upper_bound(sorted_counts_.begin(), sorted_counts_.end(), hi);
        for (auto it = a; it != b; ++it) {
          const std::uint32_t slot = by_count_[static_cast<std::size_t>(it - sorted_counts_.begin())];
          if (is_blocked(eligible_[slot])) continue;
          s.queue.emplace_back(perm.inverse(slot), slot);
        }
      }
      std::sort(s.queue.begin(), s.queue.end());
      auto any_unmatched = [&] {
        return std::any_of(zeros.begin(), zeros.end(),
                           [&](const ZeroFriend& z) { return !friends[z.index].matched; });
      };
      for (const auto& [pos, slot] : s.queue) {
        if (!any_unmatched()) break;
        ++out.candidates_examined;
        take(eligible_[slot]);
      }
    } else if (!zeros.empty()) {
      auto active = [&] {
        return std::any_of(zeros.begin(), zeros.end(), [&](const ZeroFriend& z) {
          return !friends[z.index].matched && z.available > 0;
        });
      };
      for (std::uint64_t pos = 0; pos < eligible_.size() && active(); ++pos) {
        const std::uint64_t slot = perm.forward(pos);
        const UserId c = eligible_[slot];
        if (is_blocked(c)) continue;
        ++out.candidates_examined;
        const std::uint32_t count_c = profiles_->profile(c).action_count;
        for (ZeroFriend& z : zeros) {
          if (!friends[z.index].matched && count_c >= z.lo && count_c <= z.hi) --z.available;
        }
        take(c);
      }
    }
  }

  finish(out, friends, strangers);
  return out;
}

std::vector<MatchAssignment> Matcher::match_all(std::span<const UserId> users,
                                                std::size_t workers) const {
  std::vector<MatchAssignment> out(users.size());
  std::vector<MatchScratch> scratch(resolve_workers(workers));
  parallel_for(users.size(), scratch.size(), [&](std::size_t i, std::size_t w) {
    out[i] = match(users[i], cfg_.rng_seed, scratch[w]);
  });
  return out;
}

MatchAssignment match_strangers(UserId u, const SocialGraph& graph, const ProfileStore& profiles,
                                const UserSet& eligible, const MatchConfig& cfg) {
  return Matcher(graph, profiles, eligible, cfg).match(u);
}

std::vector<MatchAssignment> match_all(std::span<const UserId> users, const SocialGraph& graph,
                                       const ProfileStore& profiles, const UserSet& eligible,
                                       const MatchConfig& cfg, std::size_t workers) {
  return Matcher(graph, profiles, eligible, cfg).match_all(users, workers);
}

}  // namespace pme
