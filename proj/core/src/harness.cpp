#include "pme/harness.hpp"

#include <sys/resource.h>

#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "pme/errors.hpp"
#include "pme/random.hpp"

namespace pme {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t match_seed(std::uint64_t master) { return derive_seed(master, "match-stage"); }
std::uint64_t bootstrap_seed(std::uint64_t master) { return derive_seed(master, "bootstrap-stage"); }

namespace {

KindId exposure_kind(const ActivityLog& log, const PipelineConfig& cfg) {
  return log.dict().kind(cfg.exposure_kind);
}

}  // namespace

MatchStage run_match_stage(const ActivityLog& log, const SocialGraph& graph, const PipelineConfig& cfg) {
  const KindId exposure = exposure_kind(log, cfg);
  const KindId match_kind = cfg.match_kind.empty() ? exposure : log.dict().kind(cfg.match_kind);
  const SplitConfig split{cfg.t, cfg.min_actions_total, cfg.min_actions_each_side};
  split.validate(log);

  MatchStage stage;
  stage.t = cfg.t;
  stage.match_kind = log.dict().kind_name(match_kind);
  stage.eligible = eligible_users(log, graph, split, cfg.core_threshold, exposure);
  ActivityLog pre = split_at(log, cfg.t).first;
  const ProfileStore profiles(pre, match_kind);
  MatchConfig mc = cfg.match;
  mc.rng_seed = match_seed(cfg.seed);
  const Matcher matcher(graph, profiles, stage.eligible, mc);
  stage.assignments = matcher.match_all(stage.eligible, cfg.workers);
  return stage;
}

EstimateStage run_estimate_stage(const ActivityLog& log, const SocialGraph& graph,
                                 std::span<const MatchAssignment> assignments, Timestamp t,
                                 const PipelineConfig& cfg) {
  const KindId exposure = exposure_kind(log, cfg);
  const KindId target = cfg.target_kind.empty() ? exposure : log.dict().kind(cfg.target_kind);
  const ActivityLog post = split_at(log, t).second;
  const EstimateSettings settings{cfg.feed, {exposure, target}, 1, t};

  EstimateStage stage;
  stage.estimation = estimate_all(assignments, graph, post, settings, cfg.workers);
  const auto& records = stage.estimation.records;
  if (records.size() >= 2) {
    stage.summary = network_estimate(records, cfg.n_bootstrap, bootstrap_seed(cfg.seed), cfg.workers);
  }
  stage.bins = susceptibility_by_activity(records, cfg.bin_edges, cfg.min_bin_users, cfg.n_bootstrap,
                                          derive_seed(bootstrap_seed(cfg.seed), "bins"));
  return stage;
}

PipelineResult run_pipeline(const ActivityLog& log, const SocialGraph& graph, const PipelineConfig& cfg) {
  PipelineResult result;
  result.match = run_match_stage(log, graph, cfg);
  result.estimate = run_estimate_stage(log, graph, result.match.assignments, cfg.t, cfg);
  if (!result.match.assignments.empty()) {
    double sum = 0.0;
    for (const auto& a : result.match.assignments) sum += a.coverage;
    result.mean_coverage = sum / static_cast<double>(result.match.assignments.size());
  }
  return result;
}

namespace {

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

json manifest_core(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["tool_version"] = m.tool_version;
  j["parameters"] = m.parameters;
  j["inputs"] = m.input_digests;
  return j;
}

}  // namespace

std::string RunManifest::digest() const { return hex64(fnv1a(manifest_core(*this).dump())); }

std::string RunManifest::to_json() const {
  json j = manifest_core(*this);
  j["digest"] = digest();
  j["telemetry"] = {{"wall_seconds", wall_seconds}, {"peak_rss_kb", peak_rss_kb}};
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.tool_version = j.value("tool_version", std::string(kToolVersion));
    m.parameters = j.at("parameters").get<std::map<std::string, std::vector<std::string>>>();
    if (j.contains("inputs")) m.input_digests = j.at("inputs").get<std::map<std::string, std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h = fnv1a(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())), h);
  }
  return hex64(h);
}

std::size_t peak_rss_kb() {
  rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
  return static_cast<std::size_t>(usage.ru_maxrss);
}

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "m") return SweepParam::m;
  if (name == "t") return SweepParam::t;
  if (name == "eps_s" || name == "eps-s") return SweepParam::eps_s;
  if (name == "eps_a" || name == "eps-a") return SweepParam::eps_a;
  throw UsageError("cannot sweep '" + std::string(name) + "' (expected m, t, eps_s or eps_a)");
}

std::string_view sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::m: return "m";
    case SweepParam::t: return "t";
    case SweepParam::eps_s: return "eps_s";
    case SweepParam::eps_a: return "eps_a";
  }
  return "?";
}

SweepResult sweep(const ActivityLog& log, const SocialGraph& graph, SweepParam param,
                  std::span<const double> values, const PipelineConfig& base) {
  SweepResult result;
  result.param = param;
  for (double value : values) {
    PipelineConfig cfg = base;
    switch (param) {
      case SweepParam::m:
        if (!(value >= 1.0)) throw UsageError("m values must be >= 1");
        cfg.feed.m = static_cast<std::size_t>(value);
        break;
      case SweepParam::t: cfg.t = static_cast<Timestamp>(value); break;
      case SweepParam::eps_s: cfg.match.eps_s = value; break;
      case SweepParam::eps_a: cfg.match.eps_a = value; break;
    }
    try {
      const PipelineResult run = run_pipeline(log, graph, cfg);
      if (!run.estimate.summary) {
        result.error = "value " + format_number(value) + ": fewer than two users could be estimated";
        break;
      }
      SweepRow row;
      row.value = value;
      row.summary = *run.estimate.summary;
      row.mean_coverage = run.mean_coverage;
      row.n_eligible = run.match.eligible.size();
      if (param == SweepParam::m && row.summary.mean_copy_influence_raw != 0.0) {
        row.ratio = row.summary.mean_friends_overlap / row.summary.mean_copy_influence_raw;
      }
      result.rows.push_back(row);
    } catch (const std::exception& e) {
      result.error = "value " + format_number(value) + ": " + e.what();
      break;
    }
  }
  return result;
}

std::string format_number(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

void write_matches(std::ostream& out, const MatchStage& stage, const Dictionary& dict,
                   const std::string& digest) {
  json header = {{"type", "header"},
                 {"t", stage.t},
                 {"match_kind", stage.match_kind},
                 {"eligible", stage.eligible.size()},
                 {"manifest", digest}};
  out << header.dump() << '\n';
  for (const auto& a : stage.assignments) {
    json pairs = json::array();
    for (const auto& p : a.pairs) {
      pairs.push_back({{"friend", dict.user_name(p.friend_user)},
                       {"stranger", dict.user_name(p.stranger)},
                       {"sim_friend", p.sim_friend},
                       {"sim_stranger", p.sim_stranger},
                       {"count_friend", p.count_friend},
                       {"count_stranger", p.count_stranger}});
    }
    json rec = {{"type", "user"},
                {"user", dict.user_name(a.user)},
                {"friend_count", a.friend_count},
                {"coverage", a.coverage},
                {"excluded", a.excluded},
                {"candidates_examined", a.candidates_examined},
                {"cap_hit", a.cap_hit},
                {"pairs", std::move(pairs)}};
    out << rec.dump() << '\n';
  }
}

MatchFile read_matches(std::istream& in, const Dictionary& dict) {
  MatchFile file;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  auto user = [&](const json& j, const char* key) {
    const auto name = j.at(key).get<std::string>();
    if (auto u = dict.find_user(name)) return *u;
    throw DataError("matches line " + std::to_string(line_no) + ": unknown user '" + name + "'");
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        file.t = j.at("t").get<Timestamp>();
        file.match_kind = j.at("match_kind").get<std::string>();
        file.digest = j.value("manifest", std::string());
        have_header = true;
        continue;
      }
      if (type != "user") throw DataError("unknown record type '" + type + "'");
      MatchAssignment a;
      a.user = user(j, "user");
      a.friend_count = j.at("friend_count").get<std::size_t>();
      a.coverage = j.at("coverage").get<double>();
      a.excluded = j.at("excluded").get<bool>();
      a.candidates_examined = j.value("candidates_examined", std::size_t{0});
      a.cap_hit = j.value("cap_hit", false);
      for (const auto& p : j.at("pairs")) {
        a.pairs.push_back({user(p, "friend"), user(p, "stranger"), p.at("sim_friend").get<double>(),
                           p.at("sim_stranger").get<double>(), p.at("count_friend").get<std::uint32_t>(),
                           p.at("count_stranger").get<std::uint32_t>()});
      }
      std::sort(a.pairs.begin(), a.pairs.end(),
                [](const MatchPair& x, const MatchPair& y) { return x.friend_user < y.friend_user; });
      file.assignments.push_back(std::move(a));
    } catch (const json::exception& e) {
      throw DataError("matches line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw DataError("matches file has no header record");
  return file;
}

void write_per_user_csv(std::ostream& out, std::span<const OverlapRecord> records,
                        const Dictionary& dict, const std::string& digest) {
  out << "# manifest=" << digest << '\n';
  out << "user,friends_overlap,strangers_overlap,raw,clamped,n_post_actions\n";
  for (const auto& r : records) {
    out << dict.user_name(r.user) << ',' << format_number(r.friends_overlap) << ','
        << format_number(r.strangers_overlap) << ',' << format_number(r.copy_influence_raw) << ','
        << format_number(r.copy_influence_clamped) << ',' << r.n_post_actions << '\n';
  }
}

void write_summary_json(std::ostream& out, const EstimateStage& stage, Timestamp t,
                        const PipelineConfig& cfg, const std::string& digest) {
  json j;
  j["manifest"] = digest;
  j["t"] = t;
  j["m"] = cfg.feed.m;
  j["feed_mode"] = std::string(feed_mode_name(cfg.feed.mode));
  j["exposure_kind"] = cfg.exposure_kind;
  j["target_kind"] = cfg.target_kind.empty() ? cfg.exposure_kind : cfg.target_kind;
  j["excluded_by_matching"] = stage.estimation.excluded_by_matching;
  j["too_few_post_actions"] = stage.estimation.too_few_post_actions;
  j["n_users"] = stage.estimation.records.size();
  if (const auto& s = stage.summary) {
    j["mean_friends_overlap"] = s->mean_friends_overlap;
    j["mean_strangers_overlap"] = s->mean_strangers_overlap;
    j["mean_copy_influence_raw"] = s->mean_copy_influence_raw;
    j["mean_copy_influence_clamped"] = s->mean_copy_influence_clamped;
    j["bootstrap_se"] = s->bootstrap_se;
    j["n_bootstrap"] = s->n_bootstrap;
    j["fraction_zero_friends_overlap"] = s->fraction_zero_friends_overlap;
    j["fraction_nonpositive_influence"] = s->fraction_nonpositive_influence;
  }
  out << j.dump(2) << '\n';
}

void write_bins_csv(std::ostream& out, std::span<const ActivityBin> bins, const std::string& digest) {
  out << "# manifest=" << digest << '\n';
  out << "lo,hi,n_users,mean_influence,se\n";
  for (const auto& b : bins) {
    out << b.lo << ',' << b.hi << ',' << b.n_users << ',' << format_number(b.mean_influence) << ','
        << format_number(b.se) << '\n';
  }
}

void write_validation_csv(std::ostream& out, const ValidationResult& result, const std::string& digest) {
  out << "# manifest=" << digest << '\n';
  out << "process,fr_overlap,copy_influence,se,runs_counted\n";
  for (const auto& r : result.table) {
    out << r.process << ',' << format_number(r.fr_overlap) << ',' << format_number(r.copy_influence)
        << ',' << format_number(r.se) << ',' << r.runs_counted << '\n';
  }
}

void write_validation_runs_csv(std::ostream& out, const ValidationResult& result,
                               const std::string& digest) {
  out << "# manifest=" << digest << '\n';
  out << "process,t,run,fr_overlap,st_overlap,copy_influence,se,n_users,fallback_rate,counted\n";
  for (const auto& r : result.runs) {
    out << r.process << ',' << r.t << ',' << r.run << ',' << format_number(r.fr_overlap) << ','
        << format_number(r.st_overlap) << ',' << format_number(r.copy_influence) << ','
        << format_number(r.se) << ',' << r.n_users << ',' << format_number(r.fallback_rate) << ','
        << (r.counted ? 1 : 0) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& result, const std::string& digest) {
  out << "# manifest=" << digest << '\n';
  out << "param,value,n_users,n_eligible,mean_coverage,mean_friends_overlap,mean_strangers_overlap,"
         "mean_copy_influence_raw,mean_copy_influence_clamped,bootstrap_se,ratio\n";
  for (const auto& r : result.rows) {
    out << sweep_param_name(result.param) << ',' << format_number(r.value) << ',' << r.summary.n_users
        << ',' << r.n_eligible << ',' << format_number(r.mean_coverage) << ','
        << format_number(r.summary.mean_friends_overlap) << ','
        << format_number(r.summary.mean_strangers_overlap) << ','
        << format_number(r.summary.mean_copy_influence_raw) << ','
        << format_number(r.summary.mean_copy_influence_clamped) << ','
        << format_number(r.summary.bootstrap_se) << ',' << (r.ratio ? format_number(*r.ratio) : "")
        << '\n';
  }
}

namespace {

json summary_json(const Summary& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"std_error", s.std_error}, {"median", s.median},
          {"min", s.min}, {"max", s.max}};
}

json kind_json(const KindStats& k) {
  return {{"user_count", k.user_count},
          {"item_count", k.item_count},
          {"action_count", k.action_count},
          {"actions_per_user", summary_json(k.actions_per_user)},
          {"actions_per_item", summary_json(k.actions_per_item)}};
}

}  // namespace

void write_stats_json(std::ostream& out, const DatasetStats& stats, const LoadReport& report) {
  json j;
  j["all"] = kind_json(stats.all);
  j["kinds"] = json::object();
  for (const auto& [name, k] : stats.per_kind) j["kinds"][name] = kind_json(k);
  j["friends_per_user"] = summary_json(stats.friends_per_user);
  j["edge_count"] = stats.edge_count;
  j["load"] = {{"action_lines", report.action_lines},
               {"actions_accepted", report.actions_accepted},
               {"actions_rejected", report.actions_rejected},
               {"actions_filtered", report.actions_filtered},
               {"edge_lines", report.edge_lines},
               {"edges_rejected", report.edges_rejected},
               {"self_edges", report.self_edges},
               {"duplicate_edges", report.duplicate_edges},
               {"warnings", report.warnings}};
  out << j.dump(2) << '\n';
}

namespace {

struct CsvTable {
  std::string manifest;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw DataError("column '" + name + "' missing");
  }
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.starts_with("# manifest=")) t.manifest = line.substr(11);
      continue;
    }
    if (t.header.empty()) {
      t.header = split_csv(line);
    } else {
      t.rows.push_back(split_csv(line));
    }
  }
  if (t.header.empty()) throw DataError(path.string() + ": no header");
  return t;
}

double to_double(const std::string& s) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw DataError("bad number '" + s + "'");
  return x;
}

/// Equal-width histogram over [lo, hi]; the last bin is closed.
std::vector<std::size_t> histogram(const std::vector<double>& values, double lo, double hi,
                                   std::size_t bins) {
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::ptrdiff_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  return counts;
}

void write_histogram(const fs::path& path, const std::string& digest, const std::vector<double>& values,
                     double lo, double hi, std::size_t bins) {
  std::ofstream out(path);
  out << "# manifest=" << digest << '\n' << "lo,hi,count\n";
  const auto counts = histogram(values, lo, hi, bins);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out << format_number(lo + width * static_cast<double>(b)) << ','
        << format_number(lo + width * static_cast<double>(b + 1)) << ',' << counts[b] << '\n';
  }
}

}  // namespace

ReportOutput report(const fs::path& results_dir, const fs::path& out_dir, std::size_t histogram_bins) {
  if (histogram_bins < 1) throw UsageError("histogram needs at least one bin");
  const fs::path per_user = results_dir / "per_user.csv";
  const fs::path summary = results_dir / "summary.json";
  const fs::path bins = results_dir / "susceptibility.csv";
  const fs::path validation = results_dir / "validation.csv";
  const fs::path sweep_file = results_dir / "sweep.csv";

  const bool has_per_user = fs::exists(per_user);
  const bool has_summary = fs::exists(summary);
  if (has_per_user != has_summary) {
    throw DataError("incomplete estimate results, missing: " +
                    (has_per_user ? summary.string() : per_user.string()));
  }
  if (!has_per_user && !fs::exists(validation) && !fs::exists(sweep_file)) {
    throw DataError("no results found, missing: " + per_user.string() + ", " + summary.string() +
                    ", " + validation.string() + ", " + sweep_file.string());
  }

  fs::create_directories(out_dir);
  ReportOutput out;
  std::ostringstream text;

  if (has_per_user) {
    const CsvTable t = read_csv(per_user);
    std::ifstream sin(summary);
    json s;
    try {
      s = json::parse(sin);
    } catch (const json::exception& e) {
      throw DataError(summary.string() + ": " + e.what());
    }
    text << "== Copy-influence estimate ==\n";
    if (t.rows.empty()) {
      text << "zero eligible users: no per-user estimates to summarise\n";
    } else {
      const std::size_t c_fo = t.col("friends_overlap");
      const std::size_t c_raw = t.col("raw");
      std::vector<double> fo, raw;
      for (const auto& r : t.rows) {
        fo.push_back(to_double(r.at(c_fo)));
        raw.push_back(to_double(r.at(c_raw)));
      }
      text << "users: " << t.rows.size() << "\n";
      if (s.contains("mean_copy_influence_raw")) {
        text << "mean Friends-Overlap: " << format_number(s["mean_friends_overlap"].get<double>()) << "\n"
             << "mean Strangers-Overlap: " << format_number(s["mean_strangers_overlap"].get<double>()) << "\n"
             << "mean copy-influence (raw): " << format_number(s["mean_copy_influence_raw"].get<double>())
             << " (bootstrap SE " << format_number(s["bootstrap_se"].get<double>()) << ")\n"
             << "mean copy-influence (clamped): "
             << format_number(s["mean_copy_influence_clamped"].get<double>()) << "\n"
             << "users with zero Friends-Overlap: "
             << format_number(s["fraction_zero_friends_overlap"].get<double>()) << "\n";
      }
      const fs::path h1 = out_dir / "histogram_copy_influence.csv";
      const fs::path h2 = out_dir / "histogram_friends_overlap.csv";
      write_histogram(h1, t.manifest, raw, -1.0, 1.0, histogram_bins);
      write_histogram(h2, t.manifest, fo, 0.0, 1.0, histogram_bins);
      out.written.push_back(h1);
      out.written.push_back(h2);
    }
  }

  if (fs::exists(bins)) {
    const CsvTable t = read_csv(bins);
    const fs::path path = out_dir / "activity_curve.csv";
    std::ofstream o(path);
    o << "# manifest=" << t.manifest << '\n' << "bin_mid,n_users,mean_influence,se\n";
    text << "== Susceptibility by activity ==\n";
    for (const auto& r : t.rows) {
      const double mid = 0.5 * (to_double(r.at(t.col("lo"))) + to_double(r.at(t.col("hi"))));
      o << format_number(mid) << ',' << r.at(t.col("n_users")) << ',' << r.at(t.col("mean_influence"))
        << ',' << r.at(t.col("se")) << '\n';
      text << "[" << r.at(t.col("lo")) << ", " << r.at(t.col("hi")) << "): " << r.at(t.col("mean_influence"))
           << " (n=" << r.at(t.col("n_users")) << ")\n";
    }
    out.written.push_back(path);
  }

  if (fs::exists(validation)) {
    const CsvTable t = read_csv(validation);
    const fs::path path = out_dir / "validation_table.csv";
    std::ofstream o(path);
    o << "# manifest=" << t.manifest << '\n' << "process,fr_overlap,copy_influence,se\n";
    text << "== Semi-synthetic validation ==\nprocess  FrOverlap  Copy-Inf.  Std.Err.\n";
    for (const auto& r : t.rows) {
      o << r.at(t.col("process")) << ',' << r.at(t.col("fr_overlap")) << ','
        << r.at(t.col("copy_influence")) << ',' << r.at(t.col("se")) << '\n';
      text << r.at(t.col("process")) << "  " << r.at(t.col("fr_overlap")) << "  "
           << r.at(t.col("copy_influence")) << "  " << r.at(t.col("se")) << "\n";
    }
    out.written.push_back(path);
  }

  if (fs::exists(sweep_file)) {
    const CsvTable t = read_csv(sweep_file);
    text << "== Sweep ==\n";
    const bool is_m = !t.rows.empty() && t.rows.front().at(t.col("param")) == "m";
    if (is_m) {
      const fs::path path = out_dir / "m_sweep_curve.csv";
      std::ofstream o(path);
      o << "# manifest=" << t.manifest << '\n' << "m,fr_overlap,copy_influence,ratio\n";
      for (const auto& r : t.rows) {
        o << r.at(t.col("value")) << ',' << r.at(t.col("mean_friends_overlap")) << ','
          << r.at(t.col("mean_copy_influence_raw")) << ',' << r.at(t.col("ratio")) << '\n';
      }
      out.written.push_back(path);
    }
    for (const auto& r : t.rows) {
      text << r.at(t.col("param")) << "=" << r.at(t.col("value"))
           << ": FrOverlap " << r.at(t.col("mean_friends_overlap")) << ", copy-influence "
           << r.at(t.col("mean_copy_influence_raw")) << "\n";
    }
  }

  out.text = text.str();
  const fs::path report_path = out_dir / "report.txt";
  std::ofstream(report_path) << out.text;
  out.written.push_back(report_path);
  return out;
}

}  // namespace pme
