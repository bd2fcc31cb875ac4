#include "pme/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "pme/errors.hpp"

namespace pme {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxWarnings = 20;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void split_fields(std::string_view line, char delim, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

/// Iterates the non-empty lines of a delimited text file. The first
/// non-empty line is the header and picks the delimiter: tab if it has one,
/// comma otherwise.
class DelimitedFile {
 public:
  explicit DelimitedFile(const fs::path& path) : path_(path), text_(read_file(path)) {
    std::string_view header;
    if (!next_line(header)) throw DataError(path_.string() + ": empty file, expected a header");
    delim_ = header.find('\t') != std::string_view::npos ? '\t' : ',';
    split_fields(header, delim_, fields_);
    for (auto f : fields_) header_.push_back(lower(f));
  }

  const std::vector<std::string>& header() const { return header_; }

  std::optional<std::size_t> column(std::initializer_list<std::string_view> names) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
      for (auto n : names) {
        if (header_[i] == n) return i;
      }
    }
    return std::nullopt;
  }

  /// Advances to the next data line; false at end of file.
  bool next(std::vector<std::string_view>& fields) {
    std::string_view line;
    if (!next_line(line)) return false;
    split_fields(line, delim_, fields);
    return true;
  }

  std::size_t line_number() const { return line_no_; }

  std::string where() const { return path_.string() + ":" + std::to_string(line_no_); }

 private:
  bool next_line(std::string_view& line) {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string::npos) end = text_.size();
      line = trim(std::string_view(text_).substr(pos_, end - pos_));
      pos_ = end + 1;
      ++line_no_;
      if (!line.empty()) return true;
    }
    return false;
  }

  fs::path path_;
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
  char delim_ = ',';
  std::vector<std::string> header_;
  std::vector<std::string_view> fields_;
};

template <class T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

/// Interns names into provisional ids, later remapped to sorted order.
class Interner {
 public:
  std::uint32_t intern(std::string_view name) {
    auto [it, inserted] = index_.try_emplace(std::string(name), static_cast<std::uint32_t>(names_.size()));
    if (inserted) names_.emplace_back(name);
    return it->second;
  }

  /// Sorted names and the provisional-to-final id map.
  std::pair<std::vector<std::string>, std::vector<std::uint32_t>> finalize() && {
    std::vector<std::uint32_t> order(names_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return names_[a] < names_[b]; });
    std::vector<std::uint32_t> remap(names_.size());
    std::vector<std::string> sorted;
    sorted.reserve(names_.size());
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
      remap[order[rank]] = rank;
      sorted.push_back(std::move(names_[order[rank]]));
    }
    return {std::move(sorted), std::move(remap)};
  }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> names_;
};

class Rejections {
 public:
  Rejections(bool lenient, LoadReport& report) : lenient_(lenient), report_(report) {}

  /// Throws in strict mode; records a warning otherwise.
  void reject(const std::string& where, const std::string& why) {
    const std::string msg = where + ": " + why;
    if (!lenient_) throw DataError(msg);
    if (report_.warnings.size() < kMaxWarnings) report_.warnings.push_back(msg);
  }

 private:
  bool lenient_;
  LoadReport& report_;
};

struct RawAction {
  std::uint32_t user;
  std::uint32_t item;
  Timestamp time;
  std::uint32_t kind;
};

}  // namespace

ActionSource ActionSource::parse(const std::string& spec) {
  ActionSource src;
  const auto colon = spec.rfind(':');
  // A colon followed by a path separator belongs to the path (e.g. C:\).
  if (colon != std::string::npos && colon + 1 < spec.size() &&
      spec.find_first_of("/\\", colon) == std::string::npos) {
    src.path = spec.substr(0, colon);
    src.kind = spec.substr(colon + 1);
  } else {
    src.path = spec;
  }
  return src;
}

Dataset load_dataset(const DatasetManifest& manifest) {
  if (manifest.actions.empty()) throw UsageError("at least one action file is required");
  Dataset out;
  LoadReport& report = out.report;
  Rejections rejections(manifest.lenient, report);

  Interner users;
  Interner items;
  std::vector<std::string> kinds = manifest.kinds;
  const bool fixed_kinds = !kinds.empty();
  auto kind_id = [&](std::string_view name) -> std::optional<std::uint32_t> {
    for (std::uint32_t k = 0; k < kinds.size(); ++k) {
      if (kinds[k] == name) return k;
    }
    if (fixed_kinds) return std::nullopt;
    kinds.emplace_back(name);
    return static_cast<std::uint32_t>(kinds.size() - 1);
  };

  std::vector<RawAction> raw;
  std::vector<std::string_view> fields;
  for (const ActionSource& src : manifest.actions) {
    DelimitedFile file(src.path);
    const auto user_col = file.column({"user", "user_id", "userid"});
    const auto item_col = file.column({"item", "item_id", "itemid"});
    const auto time_col = file.column({"timestamp", "time", "ts"});
    const auto kind_col = file.column({"kind", "action", "action_kind"});
    const auto rating_col = file.column({"rating", "score"});
    if (!user_col || !item_col || !time_col) {
      throw DataError(src.path.string() + ": header must name user, item and timestamp columns");
    }
    if (src.kind.empty() && !kind_col) {
      throw DataError(src.path.string() + ": no kind column and no :kind suffix given");
    }
    if (manifest.min_rating && !rating_col) {
      throw DataError(src.path.string() + ": rating filter requested but file has no rating column");
    }
    std::size_t needed = std::max({*user_col, *item_col, *time_col});
    if (kind_col && src.kind.empty()) needed = std::max(needed, *kind_col);
    if (rating_col && manifest.min_rating) needed = std::max(needed, *rating_col);

    while (file.next(fields)) {
      ++report.action_lines;
      if (fields.size() <= needed) {
        ++report.actions_rejected;
        rejections.reject(file.where(), "expected at least " + std::to_string(needed + 1) +
                                            " fields, got " + std::to_string(fields.size()));
        continue;
      }
      Timestamp t = 0;
      if (!parse_number(fields[*time_col], t) || t < 0) {
        ++report.actions_rejected;
        rejections.reject(file.where(),
                          "bad timestamp '" + std::string(fields[*time_col]) + "'");
        continue;
      }
      const std::string_view kind_name = src.kind.empty() ? fields[*kind_col] : src.kind;
      const auto kind = kind_id(kind_name);
      if (!kind) {
        ++report.actions_rejected;
        rejections.reject(file.where(), "unknown action kind '" + std::string(kind_name) + "'");
        continue;
      }
      if (fields[*user_col].empty() || fields[*item_col].empty()) {
        ++report.actions_rejected;
        rejections.reject(file.where(), "empty user or item");
        continue;
      }
      if (manifest.min_rating) {
        double rating = 0.0;
        if (!parse_number(fields[*rating_col], rating)) {
          ++report.actions_rejected;
          rejections.reject(file.where(), "bad rating '" + std::string(fields[*rating_col]) + "'");
          continue;
        }
        if (rating < *manifest.min_rating) {
          ++report.actions_filtered;
          continue;
        }
      }
      raw.push_back({users.intern(fields[*user_col]), items.intern(fields[*item_col]), t, *kind});
      ++report.actions_accepted;
    }
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> raw_edges;
  {
    DelimitedFile file(manifest.edges);
    if (file.header().size() < 2) throw DataError(manifest.edges.string() + ": header needs two columns");
    while (file.next(fields)) {
      ++report.edge_lines;
      if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
        ++report.edges_rejected;
        rejections.reject(file.where(), "expected two user fields");
        continue;
      }
      raw_edges.emplace_back(users.intern(fields[0]), users.intern(fields[1]));
    }
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> raw_degrees;
  if (manifest.declared_degrees) {
    DelimitedFile file(*manifest.declared_degrees);
    while (file.next(fields)) {
      std::uint32_t count = 0;
      if (fields.size() < 2 || fields[0].empty() || !parse_number(fields[1], count)) {
        rejections.reject(file.where(), "expected 'user,count'");
        continue;
      }
      raw_degrees.emplace_back(users.intern(fields[0]), count);
    }
  }

  auto [user_names, user_map] = std::move(users).finalize();
  auto [item_names, item_map] = std::move(items).finalize();
  auto dict = std::make_shared<const Dictionary>(std::move(user_names), std::move(item_names), kinds);

  std::vector<Action> actions;
  actions.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    actions.push_back({raw[i].time, UserId{user_map[raw[i].user]}, ItemId{item_map[raw[i].item]},
                       KindId{raw[i].kind}, static_cast<std::uint32_t>(i)});
  }
  raw.clear();
  raw.shrink_to_fit();

  std::vector<std::pair<UserId, UserId>> edges;
  edges.reserve(raw_edges.size());
  for (auto [a, b] : raw_edges) edges.emplace_back(UserId{user_map[a]}, UserId{user_map[b]});

  std::vector<std::optional<std::uint32_t>> declared;
  if (manifest.declared_degrees) {
    declared.assign(dict->user_count(), std::nullopt);
    for (auto [u, count] : raw_degrees) declared[user_map[u]] = count;
  }

  SocialGraph::BuildReport graph_report;
  out.graph = SocialGraph(dict->user_count(), edges, std::move(declared), &graph_report);
  report.self_edges = graph_report.self_edges;
  report.duplicate_edges = graph_report.duplicate_edges;
  out.log = ActivityLog(std::move(dict), std::move(actions));
  return out;
}

DatasetManifest write_dataset(const fs::path& dir, const ActivityLog& log,
                              const SocialGraph& graph) {
  fs::create_directories(dir);
  const Dictionary& dict = log.dict();
  DatasetManifest manifest;
  manifest.kinds = dict.kinds();

  {
    const fs::path path = dir / "actions.csv";
    std::ofstream out(path, std::ios::binary);
    out << "user,item,timestamp,kind\n";
    for (const Action& a : log.actions()) {
      out << dict.user_name(a.user) << ',' << dict.item_name(a.item) << ',' << a.time << ','
          << dict.kind_name(a.kind) << '\n';
    }
    if (!out) throw DataError("failed writing " + path.string());
    manifest.actions.push_back({path, ""});
  }
  {
    manifest.edges = dir / "edges.csv";
    std::ofstream out(manifest.edges, std::ios::binary);
    out << "user,friend\n";
    for (auto [a, b] : graph.edges()) out << dict.user_name(a) << ',' << dict.user_name(b) << '\n';
    if (!out) throw DataError("failed writing " + manifest.edges.string());
  }
  if (graph.has_declared_degrees()) {
    manifest.declared_degrees = dir / "degrees.csv";
    std::ofstream out(*manifest.declared_degrees, std::ios::binary);
    out << "user,count\n";
    for (std::uint32_t u = 0; u < graph.user_count(); ++u) {
      if (auto d = graph.declared_degree(UserId{u})) out << dict.user_name(UserId{u}) << ',' << *d << '\n';
    }
    if (!out) throw DataError("failed writing " + manifest.declared_degrees->string());
  }
  return manifest;
}

namespace {

KindStats stats_for(const ActivityLog& log, std::span<const KindId> kinds) {
  std::vector<double> per_user(log.user_count(), 0.0);
  std::vector<double> per_item(log.item_count(), 0.0);
  KindStats s;
  for (KindId k : kinds) {
    for (const Action& a : log.stream(k).events()) {
      per_user[a.user.value] += 1.0;
      per_item[a.item.value] += 1.0;
      ++s.action_count;
    }
  }
  std::erase(per_user, 0.0);
  std::erase(per_item, 0.0);
  s.user_count = per_user.size();
  s.item_count = per_item.size();
  s.actions_per_user = summarize(per_user);
  s.actions_per_item = summarize(per_item);
  return s;
}

}  // namespace

DatasetStats dataset_stats(const ActivityLog& log, const SocialGraph& graph) {
  if (log.empty()) throw UsageError("dataset_stats needs a non-empty log");
  DatasetStats stats;
  std::vector<KindId> all;
  for (std::uint32_t k = 0; k < log.kind_count(); ++k) {
    const KindId kind{k};
    all.push_back(kind);
    stats.per_kind.emplace_back(log.dict().kind_name(kind), stats_for(log, std::span(&kind, 1)));
  }
  stats.all = stats_for(log, all);

  std::vector<double> degrees;
  for (std::uint32_t u = 0; u < graph.user_count(); ++u) {
    if (const auto d = graph.degree(UserId{u}); d > 0) degrees.push_back(static_cast<double>(d));
  }
  stats.friends_per_user = summarize(degrees);
  stats.edge_count = graph.edge_count();
  return stats;
}

}  // namespace pme
