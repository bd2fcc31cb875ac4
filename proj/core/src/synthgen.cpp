#include "pme/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "pme/errors.hpp"
#include "pme/random.hpp"

namespace pme {

SynthProcess SynthProcess::parse(std::string_view spec, std::size_t k) {
  SynthProcess p;
  p.k = k;
  if (spec == "ci") {
    p.variant = Variant::copy_influence;
  } else if (spec == "pp") {
    p.variant = Variant::personal_preference;
  } else if (spec == "ee") {
    p.variant = Variant::external_exposure;
  } else if (spec.starts_with("mix:")) {
    p.variant = Variant::mixture;
    const std::string_view num = spec.substr(4);
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), p.p_copy);
    if (ec != std::errc{} || ptr != num.data() + num.size()) {
      throw UsageError("bad mixture probability in '" + std::string(spec) + "'");
    }
  } else {
    throw UsageError("unknown process '" + std::string(spec) + "' (expected ci, pp, ee or mix:<p>)");
  }
  p.validate();
  return p;
}

std::string SynthProcess::name() const {
  switch (variant) {
    case Variant::copy_influence: return "ci";
    case Variant::personal_preference: return "pp";
    case Variant::external_exposure: return "ee";
    case Variant::mixture: {
      std::ostringstream os;
      os << "mix:" << p_copy;
      return os.str();
    }
  }
  return "?";
}

void SynthProcess::validate() const {
  if (k < 1) throw UsageError("personal-preference k must be at least 1");
  if (!(p_copy >= 0.0 && p_copy <= 1.0)) throw UsageError("p_copy must lie in [0, 1]");
}

std::vector<SkeletonEntry> skeleton_of(const ActivityLog& log, std::optional<KindId> kind) {
  std::vector<SkeletonEntry> out;
  for (const Action& a : log.actions()) {
    if (kind && a.kind != *kind) continue;
    out.push_back({a.user, a.time, a.kind});
  }
  // actions() is in (time, user, item, seq) order; the skeleton must not
  // depend on items, so re-sort stably on (time, user).
  std::stable_sort(out.begin(), out.end(), [](const SkeletonEntry& a, const SkeletonEntry& b) {
    return a.time != b.time ? a.time < b.time : a.user < b.user;
  });
  return out;
}

namespace {

/// Fenwick tree over item action counts, for popularity-weighted draws.
class PopularityTree {
 public:
  explicit PopularityTree(std::size_t n) : tree_(n + 1, 0) {
    while ((top_ << 1) <= n) top_ <<= 1;
  }

  void add(std::size_t i, std::uint64_t delta) {
    total_ += delta;
    for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  std::uint64_t total() const { return total_; }

  /// Smallest index whose prefix sum exceeds r, for r in [0, total).
  std::size_t find(std::uint64_t r) const {
    std::size_t pos = 0;
    for (std::size_t step = top_; step > 0; step >>= 1) {
      if (pos + step < tree_.size() && tree_[pos + step] <= r) {
        pos += step;
        r -= tree_[pos];
      }
    }
    return pos;
  }

 private:
  std::vector<std::uint64_t> tree_;
  std::uint64_t total_ = 0;
  std::size_t top_ = 1;
};

struct RecentEvent {
  Timestamp time;
  std::uint64_t order;
  ItemId item;
};

/// Evolving state for one action kind.
struct KindState {
  std::size_t m = 0;
  std::vector<RecentEvent> rings;   // user-major, m slots per user
  std::vector<std::uint32_t> fill;  // live slots per user
  std::vector<std::uint32_t> head;  // next slot to overwrite
  PopularityTree popularity{0};
  std::vector<std::vector<UserId>> neighbours;
  std::uint64_t next_order = 0;

  void push(UserId u, RecentEvent e) {
    rings[u.value * m + head[u.value]] = e;
    head[u.value] = static_cast<std::uint32_t>((head[u.value] + 1) % m);
    fill[u.value] = std::min<std::uint32_t>(fill[u.value] + 1, static_cast<std::uint32_t>(m));
  }
};

KindState init_state(const ActivityLog& pre, KindId kind, std::size_t m, bool need_neighbours,
                     std::size_t k, Metric metric, std::span<const SkeletonEntry> skeleton) {
  KindState st;
  st.m = m;
  const std::size_t users = pre.user_count();
  st.rings.assign(users * m, RecentEvent{});
  st.fill.assign(users, 0);
  st.head.assign(users, 0);
  st.popularity = PopularityTree(pre.item_count());
  const KindStream& stream = pre.stream(kind);
  for (const Action& a : stream.events()) st.popularity.add(a.item.value, 1);
  for (std::uint32_t u = 0; u < users; ++u) {
    const auto positions = stream.user_events(UserId{u});
    const std::size_t from = positions.size() > m ? positions.size() - m : 0;
    for (std::size_t i = from; i < positions.size(); ++i) {
      const Action& a = stream.events()[positions[i]];
      st.push(UserId{u}, {a.time, positions[i], a.item});
    }
  }
  st.next_order = stream.size();

  if (need_neighbours) {
    st.neighbours.assign(users, {});
    const ProfileStore profiles(pre, kind);
    const OverlapIndex index(profiles);
    OverlapIndex::Scratch scratch;
    std::vector<bool> done(users, false);
    for (const SkeletonEntry& e : skeleton) {
      if (e.kind != kind || done[e.user.value]) continue;
      done[e.user.value] = true;
      for (const ScoredUser& s : index.top_k(e.user, k, metric, scratch)) {
        st.neighbours[e.user.value].push_back(s.user);
      }
    }
  }
  return st;
}

/// Distinct items among the last m events of `members` strictly before t.
void window_items(const KindState& st, std::span<const UserId> members, Timestamp t,
                  std::vector<RecentEvent>& events, std::vector<ItemId>& items) {
  events.clear();
  for (UserId w : members) {
    const std::size_t base = w.value * st.m;
    for (std::uint32_t i = 0; i < st.fill[w.value]; ++i) {
      const RecentEvent& e = st.rings[base + i];
      if (e.time < t) events.push_back(e);
    }
  }
  auto later = [](const RecentEvent& a, const RecentEvent& b) {
    return a.time != b.time ? a.time > b.time : a.order > b.order;
  };
  if (events.size() > st.m) {
    std::nth_element(events.begin(), events.begin() + static_cast<std::ptrdiff_t>(st.m - 1),
                     events.end(), later);
    events.resize(st.m);
  }
  items.clear();
  for (const auto& e : events) items.push_back(e.item);
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
}

}  // namespace

SynthRun generate(const ActivityLog& pre, std::span<const SkeletonEntry> skeleton,
                  const SocialGraph& graph, const SynthProcess& process, std::size_t m,
                  std::uint64_t seed, Metric metric) {
  process.validate();
  if (m < 1) throw UsageError("generator window m must be at least 1");
  if (skeleton.empty()) throw UsageError("generator needs a non-empty skeleton");
  if (pre.empty()) throw UsageError("generator needs a non-empty pre-split state");
  const auto range = pre.time_range();
  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    if (skeleton[i].time <= range->second) {
      throw UsageError("skeleton actions must come after every pre-split action");
    }
    if (i > 0 && skeleton[i].time < skeleton[i - 1].time) {
      throw UsageError("skeleton must be in chronological order");
    }
    if (skeleton[i].user.value >= pre.user_count() || skeleton[i].kind.value >= pre.kind_count()) {
      throw UsageError("skeleton references an unknown user or kind");
    }
  }

  using Variant = SynthProcess::Variant;
  const bool need_neighbours =
      process.variant == Variant::personal_preference || process.variant == Variant::mixture;

  std::map<std::uint32_t, KindState> states;
  Rng choice_rng(derive_seed(seed, "choice"));
  Rng item_rng(derive_seed(seed, "items"));

  SynthRun run;
  run.seed = seed;
  run.process = process;
  run.m = m;
  SynthDiagnostics& diag = run.diagnostics;
  std::vector<Action> out;
  out.reserve(skeleton.size());
  std::vector<RecentEvent> events;
  std::vector<ItemId> items;

  for (std::size_t idx = 0; idx < skeleton.size(); ++idx) {
    const SkeletonEntry& e = skeleton[idx];
    auto it = states.find(e.kind.value);
    if (it == states.end()) {
      it = states.emplace(e.kind.value, init_state(pre, e.kind, m, need_neighbours, process.k,
                                                   metric, skeleton)).first;
    }
    KindState& st = it->second;

    Variant chosen = process.variant;
    if (chosen == Variant::mixture) {
      chosen = uniform01(choice_rng) < process.p_copy ? Variant::copy_influence
                                                      : Variant::personal_preference;
    }

    std::optional<ItemId> item;
    if (chosen == Variant::copy_influence || chosen == Variant::personal_preference) {
      const std::span<const UserId> members =
          chosen == Variant::copy_influence ? graph.friends(e.user)
                                            : std::span<const UserId>(st.neighbours[e.user.value]);
      window_items(st, members, e.time, events, items);
      if (!items.empty()) {
        item = items[uniform_index(item_rng, items.size())];
        ++(chosen == Variant::copy_influence ? diag.copy_draws : diag.preference_draws);
      } else {
        ++diag.fallbacks;
      }
    }
    if (!item) {
      if (st.popularity.total() == 0) {
        throw UsageError("no item has any prior action to weight popularity by");
      }
      item = ItemId{static_cast<std::uint32_t>(st.popularity.find(uniform_index(item_rng, st.popularity.total())))};
      ++diag.exposure_draws;
    }

    st.push(e.user, {e.time, st.next_order++, *item});
    st.popularity.add(item->value, 1);
    out.push_back({e.time, e.user, *item, e.kind, static_cast<std::uint32_t>(idx)});
    ++diag.generated;
  }

  run.output = ActivityLog(pre.shared_dict(), std::move(out));
  return run;
}

ValidationResult validation_run(const ActivityLog& log, const SocialGraph& graph,
                                std::span<const SynthProcess> processes,
                                std::span<const Timestamp> t_list, std::size_t n_runs,
                                const ValidationConfig& cfg) {
  if (n_runs < 1) throw UsageError("validation needs at least one run");
  if (processes.empty() || t_list.empty()) throw UsageError("validation needs processes and split times");
  for (const auto& p : processes) p.validate();
  const KindId kind = log.dict().kind(cfg.kind);

  ValidationResult result;
  for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
    const Timestamp t = t_list[ti];
    SplitConfig split{t, cfg.min_actions_total, cfg.min_actions_each_side};
    split.validate(log);
    auto [pre, post] = split_at(log, t);
    const UserSet eligible = eligible_users(log, graph, split, cfg.core_threshold, kind);
    const ProfileStore profiles(pre, kind);
    const Matcher matcher(graph, profiles, eligible, cfg.match);
    const auto assignments = matcher.match_all(eligible, cfg.workers);
    const auto skeleton = skeleton_of(post, kind);
    EstimateSettings settings{cfg.feed, {kind, kind}, 1, t};

    for (std::size_t r = 0; r < n_runs; ++r) {
      const std::uint64_t run_seed = derive_seed(cfg.seed, "validation", ti * n_runs + r);
      for (const SynthProcess& process : processes) {
        const SynthRun synth = generate(pre, skeleton, graph, process, cfg.feed.m, run_seed, cfg.match.metric);
        const EstimationResult est = estimate_all(assignments, graph, synth.output, settings, cfg.workers);
        ValidationRunResult row;
        row.process = process.name();
        row.t = t;
        row.run = r;
        row.n_users = est.records.size();
        row.fallback_rate = synth.diagnostics.fallback_rate();
        if (est.records.size() >= 2) {
          const EstimateSummary s = network_estimate(est.records, cfg.n_bootstrap,
                                                     derive_seed(run_seed, "bootstrap"), cfg.workers);
          row.fr_overlap = s.mean_friends_overlap;
          row.st_overlap = s.mean_strangers_overlap;
          row.copy_influence = s.mean_copy_influence_raw;
          row.se = s.bootstrap_se;
          row.counted = row.fallback_rate <= cfg.max_fallback_rate;
        }
        result.runs.push_back(row);
      }
    }
  }

  for (const SynthProcess& process : processes) {
    ValidationRow row;
    row.process = process.name();
    for (const auto& r : result.runs) {
      if (r.process != row.process || !r.counted) continue;
      row.fr_overlap += r.fr_overlap;
      row.copy_influence += r.copy_influence;
      row.se += r.se;
      ++row.runs_counted;
    }
    if (row.runs_counted > 0) {
      const double n = static_cast<double>(row.runs_counted);
      row.fr_overlap /= n;
      row.copy_influence /= n;
      row.se /= n;
    }
    result.table.push_back(row);
  }
  return result;
}

void NetworkSpec::validate() const {
  if (n_users < 1 || n_items < 1 || n_clusters < 1) throw UsageError("network sizes must be positive");
  if (n_clusters > n_items) throw UsageError("need at least one item per cluster");
  if (min_actions > max_actions) throw UsageError("min_actions exceeds max_actions");
  if (!(mean_degree >= 0.0)) throw UsageError("mean_degree must be non-negative");
  if (!(homophily >= 0.0 && homophily <= 1.0)) throw UsageError("homophily must lie in [0, 1]");
  if (!(cross_cluster >= 0.0 && cross_cluster <= 1.0)) throw UsageError("cross_cluster must lie in [0, 1]");
  if (!(taste_spread >= 0.0 && taste_spread <= 1.0)) throw UsageError("taste_spread must lie in [0, 1]");
  if (!(shared_taste >= 0.0 && shared_taste <= 1.0)) throw UsageError("shared_taste must lie in [0, 1]");
  if (degree_model == DegreeModel::power_law && !(power_law_exponent > 2.0)) {
    throw UsageError("power-law exponent must exceed 2");
  }
  if (horizon < 1) throw UsageError("horizon must be positive");
  for (auto [a, b] : forced_edges) {
    if (a >= n_users || b >= n_users) throw UsageError("forced edge out of range");
  }
}

namespace {

std::size_t draw_poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 500.0) return static_cast<std::size_t>(std::llround(mean));
  // Knuth, in log space to survive large means.
  const double limit = -mean;
  double acc = 0.0;
  std::size_t k = 0;
  for (;;) {
    acc += std::log(1.0 - uniform01(rng));
    if (acc < limit) return k;
    ++k;
  }
}

std::size_t draw_degree(Rng& rng, const NetworkSpec& spec) {
  if (spec.degree_model == NetworkSpec::DegreeModel::poisson) return draw_poisson(rng, spec.mean_degree);
  const double a = spec.power_law_exponent;
  const double xmin = spec.mean_degree * (a - 2.0) / (a - 1.0);
  const double x = xmin * std::pow(1.0 - uniform01(rng), -1.0 / (a - 1.0));
  return std::min<std::size_t>(static_cast<std::size_t>(x), spec.n_users - 1);
}

}  // namespace

GeneratedNetwork generate_network(const NetworkSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, "network"));
  const std::size_t n = spec.n_users;
  const std::size_t clusters = spec.n_clusters;

  GeneratedNetwork net;
  net.cluster_of.resize(n);
  std::vector<std::vector<std::uint32_t>> members(clusters);
  for (std::uint32_t u = 0; u < n; ++u) {
    net.cluster_of[u] = static_cast<std::uint32_t>(u % clusters);
    members[u % clusters].push_back(u);
  }

  // Edges: each user initiates about half its target degree.
  std::vector<std::pair<UserId, UserId>> edges;
  for (auto [a, b] : spec.forced_edges) edges.emplace_back(UserId{a}, UserId{b});
  if (n > 1) {
    for (std::uint32_t u = 0; u < n; ++u) {
      const std::size_t degree = draw_degree(rng, spec);
      std::size_t initiate = degree / 2;
      if (degree % 2 == 1 && uniform01(rng) < 0.5) ++initiate;
      for (std::size_t e = 0; e < initiate; ++e) {
        for (int attempt = 0; attempt < 16; ++attempt) {
          std::uint32_t v;
          const auto& own = members[net.cluster_of[u]];
          if (uniform01(rng) < spec.homophily && own.size() > 1) {
            if (spec.locality > 0) {
              const std::size_t rank = u / clusters;
              const std::size_t width = 2 * spec.locality + 1;
              const std::size_t shift = own.size() + uniform_index(rng, width) - spec.locality;
              v = own[(rank + shift) % own.size()];
            } else {
              v = own[uniform_index(rng, own.size())];
            }
          } else {
            v = static_cast<std::uint32_t>(uniform_index(rng, n));
          }
          if (v != u) {
            edges.emplace_back(UserId{u}, UserId{v});
            break;
          }
        }
      }
    }
  }

  // Item pools: contiguous blocks, Zipf popularity over a per-user rotation.
  std::vector<std::size_t> block_start(clusters + 1);
  for (std::size_t c = 0; c <= clusters; ++c) block_start[c] = c * spec.n_items / clusters;
  std::map<std::size_t, std::vector<double>> cdf_by_size;
  for (std::size_t c = 0; c < clusters; ++c) {
    const std::size_t size = block_start[c + 1] - block_start[c];
    auto& cdf = cdf_by_size[size];
    if (!cdf.empty()) continue;
    double acc = 0.0;
    for (std::size_t r = 0; r < size; ++r) {
      acc += 1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_exponent);
      cdf.push_back(acc);
    }
    for (double& x : cdf) x /= acc;
  }

  std::vector<Action> actions;
  std::uint32_t seq = 0;
  const std::size_t span = spec.max_actions - spec.min_actions + 1;
  for (std::uint32_t u = 0; u < n; ++u) {
    const std::size_t c = net.cluster_of[u];
    const std::size_t start = block_start[c];
    const std::size_t size = block_start[c + 1] - start;
    const auto& cdf = cdf_by_size[size];
    const auto spread = static_cast<std::size_t>(spec.taste_spread * static_cast<double>(size));
    const std::size_t offset = spread > 0 ? uniform_index(rng, spread) : 0;
    const std::size_t count = spec.min_actions + uniform_index(rng, span);
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t item;
      if (uniform01(rng) < spec.cross_cluster) {
        item = uniform_index(rng, spec.n_items);
      } else {
        const double x = uniform01(rng);
        const auto rank = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
        const std::size_t shift = uniform01(rng) < spec.shared_taste ? 0 : offset;
        item = start + (shift + std::min(rank, size - 1)) % size;
      }
      const auto time = static_cast<Timestamp>(uniform_index(rng, static_cast<std::uint64_t>(spec.horizon)));
      actions.push_back({time, UserId{u}, ItemId{static_cast<std::uint32_t>(item)}, KindId{0}, seq++});
    }
  }

  auto dict = std::make_shared<const Dictionary>(Dictionary::numbered(n, spec.n_items, {spec.kind}));
  SocialGraph plain(n, edges);
  std::vector<std::optional<std::uint32_t>> declared;
  if (spec.declared_degrees) {
    declared.resize(n);
    for (std::uint32_t u = 0; u < n; ++u) declared[u] = static_cast<std::uint32_t>(plain.degree(UserId{u}));
    net.graph = SocialGraph(n, edges, std::move(declared));
  } else {
    net.graph = std::move(plain);
  }
  net.log = ActivityLog(std::move(dict), std::move(actions));
  return net;
}

}  // namespace pme
