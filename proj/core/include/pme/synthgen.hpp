#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pme/estimation.hpp"

namespace pme {

/// Behavioural process that fills in items after the split.
struct SynthProcess {
  enum class Variant { copy_influence, personal_preference, external_exposure, mixture };

  Variant variant = Variant::copy_influence;
  std::size_t k = 10;   // neighbourhood size for personal preference
  double p_copy = 0.0;  // mixture only: P(copy-influence) per action

  /// Parses `ci`, `pp`, `ee` or `mix:<p>`.
  static SynthProcess parse(std::string_view spec, std::size_t k = 10);
  std::string name() const;
  void validate() const;
};

/// The (user, time, kind) part of a post-split action.
struct SkeletonEntry {
  UserId user;
  Timestamp time = 0;
  KindId kind;

  friend bool operator==(const SkeletonEntry&, const SkeletonEntry&) = default;
};

/// Skeleton of a log in (time, user, seq) order, optionally restricted to one kind.
std::vector<SkeletonEntry> skeleton_of(const ActivityLog& log,
                                       std::optional<KindId> kind = std::nullopt);

struct SynthDiagnostics {
  std::size_t generated = 0;
  std::size_t copy_draws = 0;
  std::size_t preference_draws = 0;
  std::size_t exposure_draws = 0;
  std::size_t fallbacks = 0;  // empty window, drawn by popularity instead

  double fallback_rate() const {
    return generated == 0 ? 0.0 : static_cast<double>(fallbacks) / static_cast<double>(generated);
  }
};

struct SynthRun {
  std::uint64_t seed = 0;
  SynthProcess process;
  std::size_t m = 10;
  ActivityLog output;  // generated post-split actions only
  SynthDiagnostics diagnostics;
};

/// Replaces the items of `skeleton` (all at or after the end of `pre`) by
/// running `process` forward in time. Every generated action joins the
/// evolving log before the next one is drawn:
///  - copy-influence: uniform over the distinct items among the friends'
///    last m actions before this instant;
///  - personal-preference: same, over the k users most similar at the split;
///  - external-exposure: proportional to each item's action count so far;
///  - mixture: copy-influence with probability p_copy, else personal preference.
/// An empty window falls back to external exposure.
SynthRun generate(const ActivityLog& pre, std::span<const SkeletonEntry> skeleton,
                  const SocialGraph& graph, const SynthProcess& process, std::size_t m,
                  std::uint64_t seed, Metric metric = Metric::jaccard);

/// Knobs for validation_run.
struct ValidationConfig {
  MatchConfig match;
  FeedModel feed;
  std::string kind = "love";
  std::size_t min_actions_total = 10;
  std::size_t min_actions_each_side = 5;
  double core_threshold = 0.75;
  std::size_t k = 10;
  std::size_t n_bootstrap = 1000;
  std::uint64_t seed = 0;
  double max_fallback_rate = 0.05;
  std::size_t workers = 0;
};

struct ValidationRunResult {
  std::string process;
  Timestamp t = 0;
  std::size_t run = 0;
  double fr_overlap = 0.0;
  double st_overlap = 0.0;
  double copy_influence = 0.0;
  double se = 0.0;
  std::size_t n_users = 0;
  double fallback_rate = 0.0;
  bool counted = false;
};

struct ValidationRow {
  std::string process;
  double fr_overlap = 0.0;
  double copy_influence = 0.0;
  double se = 0.0;
  std::size_t runs_counted = 0;
};

struct ValidationResult {
  std::vector<ValidationRunResult> runs;
  std::vector<ValidationRow> table;  // one row per process, averaged over runs and T
};

/// For each T: split the real log, match once on the pre-split data, then
/// for every process and run regenerate the post-split items and estimate.
/// Run r at the i-th T uses the same seed for every process, so mixtures
/// share their random streams with the pure processes.
ValidationResult validation_run(const ActivityLog& log, const SocialGraph& graph,
                                std::span<const SynthProcess> processes,
                                std::span<const Timestamp> t_list, std::size_t n_runs,
                                const ValidationConfig& cfg);

/// Parameters for a desk-scale stand-in for a crawled network.
struct NetworkSpec {
  enum class DegreeModel { poisson, power_law };

  std::size_t n_users = 1000;
  std::size_t n_items = 4000;
  std::size_t n_clusters = 20;
  double mean_degree = 10.0;
  DegreeModel degree_model = DegreeModel::poisson;
  double power_law_exponent = 2.5;
  double homophily = 0.9;  // P(an edge stays inside the user's cluster)
  /// In-cluster partners lie within this many ring positions of the user
  /// among the cluster's members; 0 means anywhere in the cluster.
  std::size_t locality = 0;
  std::size_t min_actions = 20;
  std::size_t max_actions = 60;
  double zipf_exponent = 1.0;  // item popularity within a cluster's pool
  double taste_spread = 0.5;   // fraction of the pool over which users' favourites vary
  double shared_taste = 0.0;   // share of actions ranked by the cluster's common order
  double cross_cluster = 0.0;  // share of actions drawn uniformly from all items
  Timestamp horizon = 100'000'000;
  std::string kind = "love";
  bool declared_degrees = true;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> forced_edges;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratedNetwork {
  ActivityLog log;
  SocialGraph graph;
  std::vector<std::uint32_t> cluster_of;
};

/// Random graph with planted taste clusters: users in a cluster draw items
/// from the cluster's own pool, and most edges stay inside clusters, so
/// friends are similar without any influence.
GeneratedNetwork generate_network(const NetworkSpec& spec);

}  // namespace pme
