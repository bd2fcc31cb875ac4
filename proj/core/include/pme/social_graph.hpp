#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pme/types.hpp"

namespace pme {

/// Undirected friendship graph in CSR form, plus the optional friend counts
/// reported by the source system.
class SocialGraph {
 public:
  struct BuildReport {
    std::size_t self_edges = 0;
    std::size_t duplicate_edges = 0;
  };

  SocialGraph() = default;

  /// Builds a symmetric graph from an edge list. Duplicate edges (in either
  /// direction) collapse; self-edges are dropped and counted in `report`.
  /// `declared_degree`, when non-empty, has one entry per user; throws
  /// DataError if a declared count is below the observed degree.
  SocialGraph(std::size_t user_count, std::span<const std::pair<UserId, UserId>> edges,
              std::vector<std::optional<std::uint32_t>> declared_degree = {},
              BuildReport* report = nullptr);

  std::size_t user_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return adjacency_.size() / 2; }

  /// Sorted neighbours of u.
  std::span<const UserId> friends(UserId u) const {
    return {adjacency_.data() + offsets_[u.value], adjacency_.data() + offsets_[u.value + 1]};
  }
  std::size_t degree(UserId u) const { return offsets_[u.value + 1] - offsets_[u.value]; }
  bool are_friends(UserId a, UserId b) const;

  bool has_declared_degrees() const { return !declared_.empty(); }
  std::optional<std::uint32_t> declared_degree(UserId u) const {
    return declared_.empty() ? std::nullopt : declared_[u.value];
  }
  const std::vector<std::optional<std::uint32_t>>& declared_degrees() const { return declared_; }

  /// Each undirected edge once, as (lower id, higher id), sorted.
  std::vector<std::pair<UserId, UserId>> edges() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<UserId> adjacency_;
  std::vector<std::optional<std::uint32_t>> declared_;
};

}  // namespace pme
