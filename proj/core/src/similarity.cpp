#include "pme/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pme/errors.hpp"

namespace pme {

Metric parse_metric(std::string_view name) {
  if (name == "jaccard") return Metric::jaccard;
  if (name == "cosine") return Metric::cosine;
  throw UsageError("unknown similarity metric '" + std::string(name) + "'");
}

std::string_view metric_name(Metric m) {
  return m == Metric::jaccard ? "jaccard" : "cosine";
}

ProfileStore::ProfileStore(const ActivityLog& pre, KindId kind) : item_count_(pre.item_count()) {
  const KindStream& stream = pre.stream(kind);
  const std::size_t users = pre.user_count();
  offsets_.assign(users + 1, 0);
  counts_.assign(users, 0);
  for (std::uint32_t u = 0; u < users; ++u) {
    auto items = stream.distinct_items(UserId{u});
    items_.insert(items_.end(), items.begin(), items.end());
    offsets_[u + 1] = items_.size();
    counts_[u] = static_cast<std::uint32_t>(stream.user_action_count(UserId{u}));
  }
}

std::size_t intersection_size(std::span<const ItemId> a, std::span<const ItemId> b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double similarity_from_overlap(Metric m, std::size_t shared, std::size_t size_a,
                               std::size_t size_b) {
  if (m == Metric::jaccard) {
    const std::size_t uni = size_a + size_b - shared;
    return uni == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(uni);
  }
  if (size_a == 0 || size_b == 0) return 0.0;
  return static_cast<double>(shared) /
         std::sqrt(static_cast<double>(size_a) * static_cast<double>(size_b));
}

double jaccard(const PreferenceProfile& a, const PreferenceProfile& b) {
  return similarity_from_overlap(Metric::jaccard, intersection_size(a.items, b.items),
                                 a.items.size(), b.items.size());
}

double cosine(const PreferenceProfile& a, const PreferenceProfile& b) {
  return similarity_from_overlap(Metric::cosine, intersection_size(a.items, b.items),
                                 a.items.size(), b.items.size());
}

double similarity(Metric m, const PreferenceProfile& a, const PreferenceProfile& b) {
  return m == Metric::jaccard ? jaccard(a, b) : cosine(a, b);
}

namespace {

bool ranks_before(const ScoredUser& a, const ScoredUser& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.user < b.user;
}

}  // namespace

std::vector<ScoredUser> top_k_similar(UserId u, std::span<const UserId> pool, std::size_t k,
                                      Metric metric, const ProfileStore& profiles) {
  if (k == 0) throw UsageError("top_k_similar needs k >= 1");
  const PreferenceProfile pu = profiles.profile(u);
  std::vector<ScoredUser> scored;
  scored.reserve(pool.size());
  for (UserId v : pool) {
    if (v == u) throw UsageError("top_k_similar pool must not contain the query user");
    scored.push_back({v, similarity(metric, pu, profiles.profile(v))});
  }
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), ranks_before);
  scored.resize(keep);
  return scored;
}

OverlapIndex::OverlapIndex(const ProfileStore& profiles) : profiles_(&profiles) {
  const std::size_t items = profiles.item_count();
  offsets_.assign(items + 1, 0);
  for (std::uint32_t u = 0; u < profiles.user_count(); ++u) {
    for (ItemId i : profiles.profile(UserId{u}).items) ++offsets_[i.value + 1];
  }
  for (std::size_t i = 0; i < items; ++i) offsets_[i + 1] += offsets_[i];
  postings_.resize(offsets_.back());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::uint32_t u = 0; u < profiles.user_count(); ++u) {
    for (ItemId i : profiles.profile(UserId{u}).items) postings_[cursor[i.value]++] = UserId{u};
  }
}

void OverlapIndex::overlaps(UserId u, Scratch& scratch,
                            std::vector<std::pair<UserId, std::uint32_t>>& out) const {
  out.clear();
  if (scratch.shared.size() != profiles_->user_count()) {
    scratch.shared.assign(profiles_->user_count(), 0);
  }
  scratch.touched.clear();
  for (ItemId i : profiles_->profile(u).items) {
    for (std::size_t p = offsets_[i.value]; p < offsets_[i.value + 1]; ++p) {
      const UserId v = postings_[p];
      if (v == u) continue;
      if (scratch.shared[v.value]++ == 0) scratch.touched.push_back(v);
    }
  }
  std::sort(scratch.touched.begin(), scratch.touched.end());
  out.reserve(scratch.touched.size());
  for (UserId v : scratch.touched) {
    out.emplace_back(v, scratch.shared[v.value]);
    scratch.shared[v.value] = 0;
  }
}

std::vector<ScoredUser> OverlapIndex::top_k(UserId u, std::size_t k, Metric metric,
                                            Scratch& scratch) const {
  if (k == 0) throw UsageError("top_k needs k >= 1");
  std::vector<std::pair<UserId, std::uint32_t>> shared;
  overlaps(u, scratch, shared);
  const std::size_t size_u = profiles_->profile(u).items.size();
  std::vector<ScoredUser> scored;
  scored.reserve(shared.size());
  for (auto [v, n] : shared) {
    scored.push_back({v, similarity_from_overlap(metric, n, size_u,
                                                 profiles_->profile(v).items.size())});
  }
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), ranks_before);
  scored.resize(keep);
  // Pad with zero-similarity users in id order; `shared` is sorted by id.
  auto sh = shared.begin();
  for (std::uint32_t v = 0; scored.size() < k && v < profiles_->user_count(); ++v) {
    if (UserId{v} == u) continue;
    while (sh != shared.end() && sh->first.value < v) ++sh;
    if (sh != shared.end() && sh->first.value == v) continue;
    scored.push_back({UserId{v}, 0.0});
  }
  return scored;
}

}  // namespace pme
