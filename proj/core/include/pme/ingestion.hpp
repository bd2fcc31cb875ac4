#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pme/activity_log.hpp"
#include "pme/social_graph.hpp"
#include "pme/stats.hpp"

namespace pme {

/// One action file. When `kind` is empty the file must carry a `kind` column.
struct ActionSource {
  std::filesystem::path path;
  std::string kind;

  /// Parses the CLI form `path[:kind]`.
  static ActionSource parse(const std::string& spec);
};

struct DatasetManifest {
  std::vector<ActionSource> actions;
  std::filesystem::path edges;
  std::optional<std::filesystem::path> declared_degrees;
  /// Allowed action kinds; empty means "whatever the sources declare".
  std::vector<std::string> kinds;
  /// Skip invalid lines (counted) instead of failing on the first one.
  bool lenient = false;
  /// Drop actions whose `rating` column is below this value.
  std::optional<double> min_rating;
};

struct LoadReport {
  std::size_t action_lines = 0;
  std::size_t actions_accepted = 0;
  std::size_t actions_rejected = 0;
  std::size_t actions_filtered = 0;  // below min_rating
  std::size_t edge_lines = 0;
  std::size_t edges_rejected = 0;
  std::size_t self_edges = 0;
  std::size_t duplicate_edges = 0;
  std::vector<std::string> warnings;  // first few rejected-line messages
};

struct Dataset {
  ActivityLog log;
  SocialGraph graph;
  LoadReport report;
};

/// Reads the manifest's files. Strict mode throws DataError naming the file
/// and line of the first malformed record; lenient mode skips and counts.
Dataset load_dataset(const DatasetManifest& manifest);

/// Writes `actions.csv`, `edges.csv` and, if present, `degrees.csv` in the
/// formats load_dataset reads. Returns the manifest that reloads them.
DatasetManifest write_dataset(const std::filesystem::path& dir, const ActivityLog& log,
                              const SocialGraph& graph);

struct KindStats {
  std::size_t user_count = 0;
  std::size_t item_count = 0;
  std::size_t action_count = 0;
  Summary actions_per_user;
  Summary actions_per_item;
};

struct DatasetStats {
  KindStats all;
  std::vector<std::pair<std::string, KindStats>> per_kind;
  Summary friends_per_user;  // over users with at least one friend
  std::size_t edge_count = 0;
};

/// Throws UsageError for an empty log.
DatasetStats dataset_stats(const ActivityLog& log, const SocialGraph& graph);

}  // namespace pme
