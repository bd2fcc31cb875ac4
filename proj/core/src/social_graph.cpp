#include "pme/social_graph.hpp"

#include <algorithm>
#include <string>

#include "pme/errors.hpp"

namespace pme {

SocialGraph::SocialGraph(std::size_t user_count,
                         std::span<const std::pair<UserId, UserId>> edges,
                         std::vector<std::optional<std::uint32_t>> declared_degree,
                         BuildReport* report)
    : declared_(std::move(declared_degree)) {
  BuildReport local;
  std::vector<std::pair<UserId, UserId>> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [a, b] : edges) {
    if (a.value >= user_count || b.value >= user_count) {
      throw DataError("edge references an unknown user");
    }
    if (a == b) {
      ++local.self_edges;
      continue;
    }
    directed.emplace_back(a, b);
    directed.emplace_back(b, a);
  }
  std::sort(directed.begin(), directed.end());
  const std::size_t before = directed.size();
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
  local.duplicate_edges = (before - directed.size()) / 2;

  offsets_.assign(user_count + 1, 0);
  adjacency_.reserve(directed.size());
  for (const auto& [a, b] : directed) {
    ++offsets_[a.value + 1];
    adjacency_.push_back(b);
  }
  for (std::size_t u = 0; u < user_count; ++u) offsets_[u + 1] += offsets_[u];

  if (!declared_.empty()) {
    if (declared_.size() != user_count) {
      throw DataError("declared degrees must cover every user");
    }
    for (std::size_t u = 0; u < user_count; ++u) {
      const auto& d = declared_[u];
      if (d && *d < degree(UserId{static_cast<std::uint32_t>(u)})) {
        throw DataError("declared friend count " + std::to_string(*d) +
                        " is below the observed degree " +
                        std::to_string(degree(UserId{static_cast<std::uint32_t>(u)})) +
                        " for user #" + std::to_string(u));
      }
    }
  }
  if (report) *report = local;
}

bool SocialGraph::are_friends(UserId a, UserId b) const {
  auto f = friends(a);
  return std::binary_search(f.begin(), f.end(), b);
}

std::vector<std::pair<UserId, UserId>> SocialGraph::edges() const {
  std::vector<std::pair<UserId, UserId>> out;
  out.reserve(edge_count());
  for (std::uint32_t u = 0; u < user_count(); ++u) {
    for (UserId v : friends(UserId{u})) {
      if (UserId{u} < v) out.emplace_back(UserId{u}, v);
    }
  }
  return out;
}

}  // namespace pme
