#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pme/estimation.hpp"
#include "pme/ingestion.hpp"
#include "pme/synthgen.hpp"

namespace pme {

inline constexpr const char* kToolVersion = "1.0.0";

/// Everything a run needs besides its inputs. Stage seeds derive from
/// `seed` so that `match` followed by `estimate` equals one pipeline run.
struct PipelineConfig {
  Timestamp t = 0;
  std::string exposure_kind;
  std::string target_kind;     // empty: same as exposure
  std::string match_kind;      // empty: same as exposure
  std::size_t min_actions_total = 10;
  std::size_t min_actions_each_side = 5;
  double core_threshold = 0.75;
  MatchConfig match;           // rng_seed is overwritten from `seed`
  FeedModel feed;
  std::size_t n_bootstrap = 1000;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> bin_edges = {5, 10, 20, 50, 100, 200, 500, 1000, 100000};
  std::size_t min_bin_users = 5;
  std::size_t workers = 0;
};

std::uint64_t match_seed(std::uint64_t master);
std::uint64_t bootstrap_seed(std::uint64_t master);

struct MatchStage {
  Timestamp t = 0;
  std::string match_kind;
  UserSet eligible;
  std::vector<MatchAssignment> assignments;
};

struct EstimateStage {
  EstimationResult estimation;
  std::optional<EstimateSummary> summary;  // unset with fewer than two records
  std::vector<ActivityBin> bins;
};

MatchStage run_match_stage(const ActivityLog& log, const SocialGraph& graph, const PipelineConfig& cfg);

EstimateStage run_estimate_stage(const ActivityLog& log, const SocialGraph& graph,
                                 std::span<const MatchAssignment> assignments, Timestamp t,
                                 const PipelineConfig& cfg);

struct PipelineResult {
  MatchStage match;
  EstimateStage estimate;
  double mean_coverage = 0.0;  // over eligible users
};

PipelineResult run_pipeline(const ActivityLog& log, const SocialGraph& graph, const PipelineConfig& cfg);

/// Parameters and input digests of one CLI run, plus telemetry. The digest
/// covers everything except telemetry.
struct RunManifest {
  std::string command;
  std::map<std::string, std::vector<std::string>> parameters;
  std::map<std::string, std::string> input_digests;  // path -> FNV-1a hex
  std::string tool_version = kToolVersion;
  double wall_seconds = 0.0;
  std::size_t peak_rss_kb = 0;

  std::string digest() const;
  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

/// FNV-1a over a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

/// Peak resident set size of this process in KiB (0 if unavailable).
std::size_t peak_rss_kb();

enum class SweepParam { m, t, eps_s, eps_a };

SweepParam parse_sweep_param(std::string_view name);
std::string_view sweep_param_name(SweepParam p);

struct SweepRow {
  double value = 0.0;
  EstimateSummary summary;
  double mean_coverage = 0.0;
  std::size_t n_eligible = 0;
  std::optional<double> ratio;  // m sweeps: FrOverlap / copy-influence
};

struct SweepResult {
  SweepParam param = SweepParam::m;
  std::vector<SweepRow> rows;
  std::optional<std::string> error;  // first failure; rows hold what finished
};

/// One full pipeline per value with the base config's seeds.
SweepResult sweep(const ActivityLog& log, const SocialGraph& graph, SweepParam param,
                  std::span<const double> values, const PipelineConfig& base);

// File formats. Every CSV starts with a `# manifest=<digest>` line.

std::string format_number(double x);

void write_matches(std::ostream& out, const MatchStage& stage, const Dictionary& dict,
                   const std::string& digest);

struct MatchFile {
  Timestamp t = 0;
  std::string match_kind;
  std::string digest;
  std::vector<MatchAssignment> assignments;
};

/// Reads write_matches output; throws DataError on malformed records or
/// unknown users.
MatchFile read_matches(std::istream& in, const Dictionary& dict);

void write_per_user_csv(std::ostream& out, std::span<const OverlapRecord> records,
                        const Dictionary& dict, const std::string& digest);
void write_summary_json(std::ostream& out, const EstimateStage& stage, Timestamp t,
                        const PipelineConfig& cfg, const std::string& digest);
void write_bins_csv(std::ostream& out, std::span<const ActivityBin> bins, const std::string& digest);
void write_validation_csv(std::ostream& out, const ValidationResult& result, const std::string& digest);
void write_validation_runs_csv(std::ostream& out, const ValidationResult& result,
                               const std::string& digest);
void write_sweep_csv(std::ostream& out, const SweepResult& result, const std::string& digest);
void write_stats_json(std::ostream& out, const DatasetStats& stats, const LoadReport& report);

struct ReportOutput {
  std::vector<std::filesystem::path> written;
  std::string text;
};

/// Turns a results directory into report.txt plus plot-ready CSVs: per-user
/// histograms, the activity-bin curve, the m-sweep curve and the validation
/// table, whichever inputs exist. Throws DataError listing absent files
/// when nothing usable is present or a pair is incomplete.
ReportOutput report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir,
                    std::size_t histogram_bins = 20);

}  // namespace pme
