// pme: command-line driver for preference-matched copy-influence estimation.
//
// Exit codes: 0 success, 1 usage error, 2 data validation failure,
// 3 runtime failure (including a sweep that stopped early).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pme/errors.hpp"
#include "pme/harness.hpp"
#include "pme/ingestion.hpp"
#include "pme/random.hpp"
#include "pme/synthgen.hpp"

namespace fs = std::filesystem;
using namespace pme;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

/// Sweep stopped part-way; partial results were written.
class PartialFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataFlags {
  std::vector<std::string> actions;
  std::string edges;
  std::string degrees;
  std::vector<std::string> kinds;
  bool lenient = false;
  std::optional<double> min_rating;
};

void add_data_flags(CLI::App& app, DataFlags& f) {
  app.add_option("--actions", f.actions, "Action file as path[:kind]; repeatable")->required();
  app.add_option("--edges", f.edges, "Friendship edge list")->required();
  app.add_option("--degrees", f.degrees, "Declared friend counts per user");
  app.add_option("--kinds", f.kinds, "Allowed action kinds")->delimiter(',');
  app.add_flag("--lenient", f.lenient, "Skip and count malformed lines instead of failing");
  app.add_option("--min-rating", f.min_rating, "Drop actions whose rating column is below this");
}

Dataset load(const DataFlags& f, RunManifest& manifest) {
  DatasetManifest dm;
  for (const auto& a : f.actions) dm.actions.push_back(ActionSource::parse(a));
  dm.edges = f.edges;
  if (!f.degrees.empty()) dm.declared_degrees = f.degrees;
  dm.kinds = f.kinds;
  dm.lenient = f.lenient;
  dm.min_rating = f.min_rating;
  for (const auto& a : dm.actions) manifest.input_digests[a.path.string()] = file_digest(a.path);
  manifest.input_digests[dm.edges.string()] = file_digest(dm.edges);
  if (dm.declared_degrees) manifest.input_digests[dm.declared_degrees->string()] = file_digest(*dm.declared_degrees);
  Dataset d = load_dataset(dm);
  if (d.report.actions_rejected + d.report.edges_rejected > 0) {
    std::cerr << "skipped " << d.report.actions_rejected << " action lines and " << d.report.edges_rejected
              << " edge lines\n";
    for (const auto& w : d.report.warnings) std::cerr << "  " << w << '\n';
  }
  return d;
}

/// Split time given either directly or as a quantile of action times.
struct SplitFlags {
  std::optional<Timestamp> t;
  std::optional<double> quantile;

  void add(CLI::App& app) {
    auto* a = app.add_option("--t", t, "Split time");
    auto* b = app.add_option("--t-quantile", quantile,
                             "Split at this quantile of action times (0.9 leaves 10% after the split)")
                  ->check(CLI::Range(0.0, 1.0));
    a->excludes(b);
  }

  Timestamp resolve(const ActivityLog& log) const {
    if (t) return *t;
    if (quantile) return time_quantile(log, *quantile);
    throw UsageError("one of --t or --t-quantile is required");
  }
};

struct PipelineFlags {
  SplitFlags split;
  PipelineConfig cfg;
  std::string metric = "jaccard";
  std::string feed_mode = "full";
  std::optional<std::size_t> max_candidates;
  std::size_t threads = 0;

  void add_match(CLI::App& app) {
    app.add_option("--exposure-kind", cfg.exposure_kind,
                   "Kind shown in feeds (default: the only kind present)");
    app.add_option("--match-kind", cfg.match_kind, "Kind used for similarity and activity (default: exposure)");
    app.add_option("--min-actions-total", cfg.min_actions_total, "Eligibility: actions overall")
        ->capture_default_str();
    app.add_option("--min-actions-each-side", cfg.min_actions_each_side, "Eligibility: actions on each side")
        ->capture_default_str();
    app.add_option("--core-threshold", cfg.core_threshold, "Share of declared friends that must be present")
        ->capture_default_str();
    app.add_option("--eps-s", cfg.match.eps_s, "Relative similarity tolerance")->capture_default_str();
    app.add_option("--eps-a", cfg.match.eps_a, "Relative activity tolerance")->capture_default_str();
    app.add_option("--coverage", cfg.match.coverage_required, "Matched share of friends required")
        ->capture_default_str();
    app.add_option("--max-candidates", max_candidates, "Cap on candidates sampled per user");
    app.add_option("--metric", metric, "jaccard or cosine")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads (0: all cores); results do not depend on it");
  }

  void add_estimate(CLI::App& app) {
    app.add_option("--target-kind", cfg.target_kind, "Kind of u's actions tested for copying (default: exposure)");
    app.add_option("--m", cfg.feed.m, "Attention budget: feed length")->capture_default_str();
    app.add_option("--feed-mode", feed_mode, "full or latest-per-friend")->capture_default_str();
    app.add_option("--bootstrap", cfg.n_bootstrap, "Bootstrap resamples")->capture_default_str();
    app.add_option("--bins", cfg.bin_edges, "Activity bin edges for susceptibility")->delimiter(',');
    app.add_option("--min-bin-users", cfg.min_bin_users, "Drop activity bins with fewer users")
        ->capture_default_str();
  }

  PipelineConfig resolve(const ActivityLog& log) {
    PipelineConfig c = cfg;
    c.match.metric = parse_metric(metric);
    c.match.max_candidates = max_candidates;
    c.feed.mode = parse_feed_mode(feed_mode);
    c.feed.validate();
    c.workers = threads;
    if (c.exposure_kind.empty()) {
      if (log.dict().kind_count() != 1) throw UsageError("--exposure-kind is required when several kinds are loaded");
      c.exposure_kind = log.dict().kind_name(KindId{0});
    }
    return c;
  }
};

/// Every option value except output location and thread count, which do
/// not affect results. Defaults count, so the manifest is complete.
void capture(const CLI::App& sub, RunManifest& manifest) {
  manifest.command = sub.get_name();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "out" || name == "threads" || name.empty()) continue;
    if (opt->count() > 0) {
      if (opt->get_expected_max() == 0) {
        manifest.parameters[name] = {"true"};
      } else {
        manifest.parameters[name] = opt->results();
      }
    } else if (!opt->get_default_str().empty()) {
      manifest.parameters[name] = {opt->get_default_str()};
    }
  }
}

/// Stores resolved split times so a replay does not depend on quantiles.
void record_times(RunManifest& manifest, const std::vector<Timestamp>& times) {
  manifest.parameters.erase("t-quantile");
  manifest.parameters.erase("t-quantiles");
  std::vector<std::string> values;
  for (Timestamp t : times) values.push_back(std::to_string(t));
  manifest.parameters["t"] = values;
}

/// Opens a file for writing, creating parent directories.
std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

struct Telemetry {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void finish(RunManifest& m) const {
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m.peak_rss_kb = peak_rss_kb();
  }
};

void write_manifest(const fs::path& path, RunManifest& manifest, const Telemetry& tel) {
  tel.finish(manifest);
  open_out(path) << manifest.to_json() << '\n';
}

void print_summary(const EstimateStage& e, std::size_t eligible) {
  std::cout << "eligible users: " << eligible << "\n"
            << "estimated users: " << e.estimation.records.size() << " (excluded by matching "
            << e.estimation.excluded_by_matching << ", too few post-split actions "
            << e.estimation.too_few_post_actions << ")\n";
  if (!e.summary) {
    std::cout << "fewer than two users estimated; no network estimate\n";
    return;
  }
  const EstimateSummary& s = *e.summary;
  std::cout << "Friends-Overlap: " << format_number(s.mean_friends_overlap) << "\n"
            << "Strangers-Overlap: " << format_number(s.mean_strangers_overlap) << "\n"
            << "copy-influence (raw): " << format_number(s.mean_copy_influence_raw) << " +- "
            << format_number(s.bootstrap_se) << "\n"
            << "copy-influence (clamped): " << format_number(s.mean_copy_influence_clamped) << "\n";
}

void write_estimate_outputs(const fs::path& out, const EstimateStage& e, Timestamp t, const PipelineConfig& cfg,
                            const Dictionary& dict, const std::string& digest) {
  fs::create_directories(out);
  {
    auto f = open_out(out / "per_user.csv");
    write_per_user_csv(f, e.estimation.records, dict, digest);
  }
  {
    auto f = open_out(out / "summary.json");
    write_summary_json(f, e, t, cfg, digest);
  }
  auto f = open_out(out / "susceptibility.csv");
  write_bins_csv(f, e.bins, digest);
}

std::string dir_safe(std::string s) {
  for (char& c : s) {
    if (c == ':' || c == '/') c = '-';
  }
  return s;
}

std::vector<Timestamp> resolve_times(const std::vector<Timestamp>& ts, const std::vector<double>& qs,
                                     const ActivityLog& log) {
  std::vector<Timestamp> out = ts;
  for (double q : qs) out.push_back(time_quantile(log, q));
  if (out.empty()) throw UsageError("give split times with --t or --t-quantiles");
  return out;
}

int run(std::vector<std::string> args);

int dispatch(CLI::App& app, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  app.parse(args);
  return 0;
}

int run(std::vector<std::string> args) {
  CLI::App app{"Preference-matched estimation of copy-influence in social feeds", "pme"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  Telemetry tel;
  int status = 0;

  // ingest
  DataFlags ingest_data;
  std::string ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Validate a dataset and write descriptive statistics");
  add_data_flags(*ingest, ingest_data);
  ingest->add_option("--out", ingest_out, "Output directory")->required();
  ingest->callback([&] {
    RunManifest manifest;
    capture(*ingest, manifest);
    const Dataset d = load(ingest_data, manifest);
    const DatasetStats stats = dataset_stats(d.log, d.graph);
    {
      auto f = open_out(fs::path(ingest_out) / "stats.json");
      write_stats_json(f, stats, d.report);
    }
    std::cout << "users: " << d.log.user_count() << ", items: " << d.log.item_count()
              << ", actions: " << d.log.size() << ", edges: " << d.graph.edge_count() << "\n";
    for (const auto& [kind, ks] : stats.per_kind) {
      std::cout << "  " << kind << ": " << ks.action_count << " actions by " << ks.user_count << " users on "
                << ks.item_count << " items\n";
    }
    write_manifest(fs::path(ingest_out) / "manifest.json", manifest, tel);
  });

  // generate
  NetworkSpec spec;
  std::string degree_model = "poisson";
  std::string generate_out;
  auto* gen = app.add_subcommand("generate", "Write a synthetic network with planted taste clusters");
  gen->add_option("--users", spec.n_users, "Users")->capture_default_str();
  gen->add_option("--items", spec.n_items, "Items")->capture_default_str();
  gen->add_option("--clusters", spec.n_clusters, "Taste clusters")->capture_default_str();
  gen->add_option("--degree", spec.mean_degree, "Mean friend count")->capture_default_str();
  gen->add_option("--degree-model", degree_model, "poisson or power-law")->capture_default_str();
  gen->add_option("--power-law-exponent", spec.power_law_exponent, "Degree tail exponent")->capture_default_str();
  gen->add_option("--homophily", spec.homophily, "Share of edges inside a cluster")->capture_default_str();
  gen->add_option("--locality", spec.locality, "In-cluster friends within this many ring positions (0: anywhere)")
      ->capture_default_str();
  gen->add_option("--min-actions", spec.min_actions, "Fewest actions per user")->capture_default_str();
  gen->add_option("--max-actions", spec.max_actions, "Most actions per user")->capture_default_str();
  gen->add_option("--zipf", spec.zipf_exponent, "Item popularity exponent inside a cluster")->capture_default_str();
  gen->add_option("--taste-spread", spec.taste_spread, "Share of the pool over which favourites vary")
      ->capture_default_str();
  gen->add_option("--shared-taste", spec.shared_taste, "Share of actions from the cluster's common ranking")
      ->capture_default_str();
  gen->add_option("--cross-cluster", spec.cross_cluster, "Share of actions drawn from all items")
      ->capture_default_str();
  gen->add_option("--horizon", spec.horizon, "Timestamps lie in [0, horizon)")->capture_default_str();
  gen->add_option("--kind", spec.kind, "Action kind name")->capture_default_str();
  gen->add_option("--seed", spec.seed, "Seed")->capture_default_str();
  gen->add_option("--out", generate_out, "Output directory")->required();
  gen->callback([&] {
    RunManifest manifest;
    capture(*gen, manifest);
    if (degree_model == "poisson") {
      spec.degree_model = NetworkSpec::DegreeModel::poisson;
    } else if (degree_model == "power-law") {
      spec.degree_model = NetworkSpec::DegreeModel::power_law;
    } else {
      throw UsageError("unknown degree model '" + degree_model + "'");
    }
    const GeneratedNetwork net = generate_network(spec);
    write_dataset(generate_out, net.log, net.graph);
    {
      auto f = open_out(fs::path(generate_out) / "clusters.csv");
      f << "# manifest=" << manifest.digest() << "\nuser,cluster\n";
      for (std::uint32_t u = 0; u < net.cluster_of.size(); ++u) {
        f << net.log.dict().user_name(UserId{u}) << ',' << net.cluster_of[u] << '\n';
      }
    }
    std::cout << "wrote " << net.log.size() << " actions by " << net.log.user_count() << " users and "
              << net.graph.edge_count() << " edges to " << generate_out << "\n";
    write_manifest(fs::path(generate_out) / "manifest.json", manifest, tel);
  });

  // match
  DataFlags match_data;
  PipelineFlags match_flags;
  std::string match_out;
  auto* match = app.add_subcommand("match", "Assign a matched stranger to every friend of every eligible user");
  add_data_flags(*match, match_data);
  match_flags.split.add(*match);
  match_flags.add_match(*match);
  match->add_option("--out", match_out, "Matches file (JSON lines)")->required();
  match->callback([&] {
    RunManifest manifest;
    capture(*match, manifest);
    const Dataset d = load(match_data, manifest);
    PipelineConfig cfg = match_flags.resolve(d.log);
    cfg.t = match_flags.split.resolve(d.log);
    record_times(manifest, {cfg.t});
    const MatchStage stage = run_match_stage(d.log, d.graph, cfg);
    {
      auto f = open_out(match_out);
      write_matches(f, stage, d.log.dict(), manifest.digest());
    }
    std::size_t excluded = 0;
    for (const auto& a : stage.assignments) excluded += a.excluded ? 1 : 0;
    std::cout << "split time: " << cfg.t << "\neligible users: " << stage.eligible.size()
              << "\nexcluded for incomplete coverage: " << excluded << "\n";
    fs::path mpath = match_out;
    mpath.replace_extension(".manifest.json");
    write_manifest(mpath, manifest, tel);
  });

  // estimate
  DataFlags est_data;
  PipelineFlags est_flags;
  std::string est_matches;
  std::string est_out;
  auto* est = app.add_subcommand("estimate", "Friends- and Strangers-Overlap, copy-influence and bootstrap SE");
  add_data_flags(*est, est_data);
  est_flags.split.add(*est);
  est_flags.add_match(*est);
  est_flags.add_estimate(*est);
  est->add_option("--matches", est_matches, "Matches from `pme match`; otherwise matching runs first");
  est->add_option("--out", est_out, "Output directory")->required();
  est->callback([&] {
    RunManifest manifest;
    capture(*est, manifest);
    const Dataset d = load(est_data, manifest);
    PipelineConfig cfg = est_flags.resolve(d.log);
    EstimateStage stage;
    std::size_t eligible = 0;
    if (!est_matches.empty()) {
      if (est_flags.split.t || est_flags.split.quantile) throw UsageError("the split time comes from --matches");
      manifest.input_digests[est_matches] = file_digest(est_matches);
      std::ifstream in(est_matches);
      if (!in) throw DataError("cannot read " + est_matches);
      const MatchFile mf = read_matches(in, d.log.dict());
      cfg.t = mf.t;
      cfg.match_kind = mf.match_kind;
      stage = run_estimate_stage(d.log, d.graph, mf.assignments, cfg.t, cfg);
      eligible = mf.assignments.size();
    } else {
      cfg.t = est_flags.split.resolve(d.log);
      record_times(manifest, {cfg.t});
      PipelineResult r = run_pipeline(d.log, d.graph, cfg);
      stage = std::move(r.estimate);
      eligible = r.match.eligible.size();
    }
    write_estimate_outputs(est_out, stage, cfg.t, cfg, d.log.dict(), manifest.digest());
    std::cout << "split time: " << cfg.t << "\n";
    print_summary(stage, eligible);
    write_manifest(fs::path(est_out) / "manifest.json", manifest, tel);
  });

  // synth
  DataFlags synth_data;
  std::vector<std::string> synth_processes = {"ci"};
  std::size_t synth_k = 10, synth_m = 10, synth_runs = 1;
  std::vector<Timestamp> synth_t;
  std::vector<double> synth_q;
  std::string synth_kind;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Replace post-split items with a behavioural process");
  add_data_flags(*synth, synth_data);
  synth->add_option("--process", synth_processes, "ci, pp, ee or mix:<p>")->delimiter(',')->capture_default_str();
  synth->add_option("--k", synth_k, "Neighbours for personal preference")->capture_default_str();
  synth->add_option("--m", synth_m, "Window length the processes draw from")->capture_default_str();
  synth->add_option("--runs", synth_runs, "Runs per process and split time")->capture_default_str();
  synth->add_option("--t", synth_t, "Split times")->delimiter(',');
  synth->add_option("--t-quantiles", synth_q, "Split times as quantiles of action times")->delimiter(',');
  synth->add_option("--kind", synth_kind, "Kind to regenerate (default: the only kind present)");
  synth->add_option("--seed", synth_seed, "Master seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->callback([&] {
    RunManifest manifest;
    capture(*synth, manifest);
    const Dataset d = load(synth_data, manifest);
    if (synth_kind.empty()) {
      if (d.log.dict().kind_count() != 1) throw UsageError("--kind is required when several kinds are loaded");
      synth_kind = d.log.dict().kind_name(KindId{0});
    }
    const KindId kind = d.log.dict().kind(synth_kind);
    const auto times = resolve_times(synth_t, synth_q, d.log);
    record_times(manifest, times);
    std::vector<SynthProcess> procs;
    for (const auto& p : synth_processes) procs.push_back(SynthProcess::parse(p, synth_k));
    const std::string digest = manifest.digest();
    auto runs_csv = open_out(fs::path(synth_out) / "synth_runs.csv");
    runs_csv << "# manifest=" << digest << "\nprocess,t,run,dir,generated,fallbacks,fallback_rate\n";
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      auto [pre, post] = split_at(d.log, times[ti]);
      const auto skeleton = skeleton_of(post, kind);
      std::vector<Action> kept = pre.actions();
      for (const auto& a : post.actions()) {
        if (a.kind != kind) kept.push_back(a);
      }
      for (std::size_t r = 0; r < synth_runs; ++r) {
        // Same seeds as `validate`, so a run here is the data behind that run there.
        const std::uint64_t run_seed = derive_seed(synth_seed, "validation", ti * synth_runs + r);
        for (const auto& proc : procs) {
          const SynthRun s = generate(pre, skeleton, d.graph, proc, synth_m, run_seed);
          std::vector<Action> all = kept;
          const auto generated = s.output.actions();
          all.insert(all.end(), generated.begin(), generated.end());
          const ActivityLog out_log(d.log.shared_dict(), std::move(all));
          const std::string name =
              dir_safe(proc.name()) + "_t" + std::to_string(times[ti]) + "_r" + std::to_string(r);
          write_dataset(fs::path(synth_out) / name, out_log, d.graph);
          runs_csv << proc.name() << ',' << times[ti] << ',' << r << ',' << name << ','
                   << s.diagnostics.generated << ',' << s.diagnostics.fallbacks << ','
                   << format_number(s.diagnostics.fallback_rate()) << '\n';
        }
      }
    }
    std::cout << "wrote " << times.size() * synth_runs * procs.size() << " datasets to " << synth_out << "\n";
    write_manifest(fs::path(synth_out) / "manifest.json", manifest, tel);
  });

  // validate
  DataFlags val_data;
  ValidationConfig vcfg;
  std::vector<std::string> val_processes = {"ci", "pp", "ee", "mix:0.01", "mix:0.1", "mix:0.5"};
  std::size_t val_runs = 10;
  std::vector<Timestamp> val_t;
  std::vector<double> val_q;
  std::string val_kind, val_feed_mode = "full", val_out;
  auto* val = app.add_subcommand("validate", "Semi-synthetic validation table: FrOverlap vs. estimate per process");
  add_data_flags(*val, val_data);
  val->add_option("--process", val_processes, "Processes: ci, pp, ee, mix:<p>")->delimiter(',')->capture_default_str();
  val->add_option("--k", vcfg.k, "Neighbours for personal preference")->capture_default_str();
  val->add_option("--runs", val_runs, "Runs per process and split time")->capture_default_str();
  val->add_option("--t", val_t, "Split times")->delimiter(',');
  val->add_option("--t-quantiles", val_q, "Split times as quantiles of action times")->delimiter(',');
  val->add_option("--kind", val_kind, "Action kind (default: the only kind present)");
  val->add_option("--m", vcfg.feed.m, "Attention budget")->capture_default_str();
  val->add_option("--feed-mode", val_feed_mode, "full or latest-per-friend")->capture_default_str();
  val->add_option("--eps-s", vcfg.match.eps_s, "Relative similarity tolerance")->capture_default_str();
  val->add_option("--eps-a", vcfg.match.eps_a, "Relative activity tolerance")->capture_default_str();
  val->add_option("--coverage", vcfg.match.coverage_required, "Matched share of friends required")
      ->capture_default_str();
  val->add_option("--min-actions-total", vcfg.min_actions_total, "Eligibility: actions overall")->capture_default_str();
  val->add_option("--min-actions-each-side", vcfg.min_actions_each_side, "Eligibility: actions on each side")
      ->capture_default_str();
  val->add_option("--core-threshold", vcfg.core_threshold, "Share of declared friends present")->capture_default_str();
  val->add_option("--bootstrap", vcfg.n_bootstrap, "Bootstrap resamples per run")->capture_default_str();
  val->add_option("--max-fallback", vcfg.max_fallback_rate, "Runs above this fallback rate are not counted")
      ->capture_default_str();
  val->add_option("--seed", vcfg.seed, "Master seed")->capture_default_str();
  val->add_option("--threads", vcfg.workers, "Worker threads (0: all cores)");
  val->add_option("--out", val_out, "Output directory")->required();
  val->callback([&] {
    RunManifest manifest;
    capture(*val, manifest);
    const Dataset d = load(val_data, manifest);
    if (val_kind.empty()) {
      if (d.log.dict().kind_count() != 1) throw UsageError("--kind is required when several kinds are loaded");
      val_kind = d.log.dict().kind_name(KindId{0});
    }
    vcfg.kind = val_kind;
    vcfg.feed.mode = parse_feed_mode(val_feed_mode);
    vcfg.match.rng_seed = match_seed(vcfg.seed);
    const auto times = resolve_times(val_t, val_q, d.log);
    record_times(manifest, times);
    std::vector<SynthProcess> procs;
    for (const auto& p : val_processes) procs.push_back(SynthProcess::parse(p, vcfg.k));
    const ValidationResult result = validation_run(d.log, d.graph, procs, times, val_runs, vcfg);
    const std::string digest = manifest.digest();
    {
      auto f = open_out(fs::path(val_out) / "validation.csv");
      write_validation_csv(f, result, digest);
    }
    {
      auto f = open_out(fs::path(val_out) / "validation_runs.csv");
      write_validation_runs_csv(f, result, digest);
    }
    std::cout << "process    FrOverlap  copy-influence  SE        runs\n";
    for (const auto& r : result.table) {
      std::cout << r.process << std::string(r.process.size() < 11 ? 11 - r.process.size() : 1, ' ')
                << format_number(r.fr_overlap) << "  " << format_number(r.copy_influence) << "  "
                << format_number(r.se) << "  " << r.runs_counted << "\n";
    }
    write_manifest(fs::path(val_out) / "manifest.json", manifest, tel);
  });

  // sweep
  DataFlags sweep_data;
  PipelineFlags sweep_flags;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::string sweep_out;
  auto* sw = app.add_subcommand("sweep", "Full pipeline once per value of one parameter");
  add_data_flags(*sw, sweep_data);
  sweep_flags.split.add(*sw);
  sweep_flags.add_match(*sw);
  sweep_flags.add_estimate(*sw);
  sw->add_option("--param", sweep_param, "m, t, eps-s or eps-a")->required();
  sw->add_option("--values", sweep_values, "Values, comma separated")->delimiter(',')->required();
  sw->add_option("--out", sweep_out, "Output directory")->required();
  sw->callback([&] {
    RunManifest manifest;
    capture(*sw, manifest);
    const Dataset d = load(sweep_data, manifest);
    const SweepParam param = parse_sweep_param(sweep_param);
    PipelineConfig cfg = sweep_flags.resolve(d.log);
    if (param != SweepParam::t) {
      cfg.t = sweep_flags.split.resolve(d.log);
      record_times(manifest, {cfg.t});
    }
    const SweepResult result = sweep(d.log, d.graph, param, sweep_values, cfg);
    {
      auto f = open_out(fs::path(sweep_out) / "sweep.csv");
      write_sweep_csv(f, result, manifest.digest());
    }
    for (const auto& r : result.rows) {
      std::cout << sweep_param_name(param) << "=" << format_number(r.value) << ": Friends-Overlap "
                << format_number(r.summary.mean_friends_overlap) << ", copy-influence "
                << format_number(r.summary.mean_copy_influence_raw);
      if (r.ratio) std::cout << ", ratio " << format_number(*r.ratio);
      std::cout << "\n";
    }
    write_manifest(fs::path(sweep_out) / "manifest.json", manifest, tel);
    if (result.error) throw PartialFailure("sweep stopped early: " + *result.error);
  });

  // report
  std::string report_in, report_out;
  std::size_t report_bins = 20;
  auto* rep = app.add_subcommand("report", "Summary text and plot-ready CSVs from a results directory");
  rep->add_option("--results", report_in, "Directory written by estimate, validate or sweep")->required();
  rep->add_option("--out", report_out, "Output directory (default: <results>/report)");
  rep->add_option("--histogram-bins", report_bins, "Bins for per-user histograms")->capture_default_str();
  rep->callback([&] {
    const fs::path out = report_out.empty() ? fs::path(report_in) / "report" : fs::path(report_out);
    const ReportOutput r = report(report_in, out, report_bins);
    std::cout << r.text;
    for (const auto& p : r.written) std::cout << "wrote " << p.string() << "\n";
  });

  // replay
  std::string replay_manifest, replay_out;
  std::size_t replay_threads = 0;
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest.json");
  replay->add_option("--manifest", replay_manifest, "Manifest written by an earlier run")->required();
  replay->add_option("--out", replay_out, "Output location for the re-run")->required();
  replay->add_option("--threads", replay_threads, "Worker threads");
  replay->callback([&] {
    std::ifstream in(replay_manifest);
    if (!in) throw DataError("cannot read " + replay_manifest);
    std::stringstream text;
    text << in.rdbuf();
    const RunManifest m = RunManifest::from_json(text.str());
    if (m.tool_version != kToolVersion) {
      std::cerr << "warning: manifest written by version " << m.tool_version << ", this is " << kToolVersion << "\n";
    }
    for (const auto& [path, digest] : m.input_digests) {
      if (file_digest(path) != digest) throw DataError("input changed since the manifest was written: " + path);
    }
    std::vector<std::string> argv = {"pme", m.command};
    for (const auto& [name, values] : m.parameters) {
      for (const auto& v : values) argv.push_back("--" + name + "=" + v);
    }
    argv.push_back("--out=" + replay_out);
    if (m.command == "match" || m.command == "estimate" || m.command == "sweep" || m.command == "validate") {
      argv.push_back("--threads=" + std::to_string(replay_threads));
    }
    status = run(argv);
  });

  try {
    std::vector<std::string> rest(args.begin() + 1, args.end());
    dispatch(app, rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const PartialFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc));
}
