#include "pme/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pme/errors.hpp"

namespace pme {

void SplitConfig::validate(const ActivityLog& log) const {
  if (min_actions_each_side < 1) throw UsageError("min_actions_each_side must be at least 1");
  auto range = log.time_range();
  if (!range || !(range->first < t && t <= range->second)) {
    throw UsageError("split time " + std::to_string(t) +
                     " is not strictly inside the log's time range");
  }
}

std::pair<ActivityLog, ActivityLog> split_at(const ActivityLog& log, Timestamp t) {
  std::vector<Action> before;
  std::vector<Action> after;
  for (std::uint32_t k = 0; k < log.kind_count(); ++k) {
    auto events = log.stream(KindId{k}).events();
    auto mid = std::partition_point(events.begin(), events.end(),
                                    [&](const Action& a) { return a.time < t; });
    before.insert(before.end(), events.begin(), mid);
    after.insert(after.end(), mid, events.end());
  }
  return {ActivityLog(log.shared_dict(), std::move(before)),
          ActivityLog(log.shared_dict(), std::move(after))};
}

UserSet core_users(const SocialGraph& graph, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw UsageError("core-user threshold must lie in (0, 1]");
  }
  UserSet out;
  for (std::uint32_t i = 0; i < graph.user_count(); ++i) {
    const UserId u{i};
    const std::size_t observed = graph.degree(u);
    const auto declared = graph.declared_degree(u);
    if (!declared) {
      if (observed >= 1) out.push_back(u);
      continue;
    }
    if (*declared == 0) {
      if (observed > 0) {
        throw DataError("user #" + std::to_string(i) + " declares zero friends but has " +
                        std::to_string(observed));
      }
      continue;
    }
    if (static_cast<double>(observed) / static_cast<double>(*declared) >= threshold) {
      out.push_back(u);
    }
  }
  return out;
}

UserSet eligible_users(const ActivityLog& log, const SocialGraph& graph, const SplitConfig& cfg,
                       double threshold, KindId kind) {
  const KindStream& stream = log.stream(kind);
  UserSet out;
  for (UserId u : core_users(graph, threshold)) {
    if (u.value >= log.user_count()) continue;
    const std::size_t total = stream.user_action_count(u);
    if (total < cfg.min_actions_total) continue;
    const std::size_t pre = stream.user_count_before(u, cfg.t);
    if (pre < cfg.min_actions_each_side || total - pre < cfg.min_actions_each_side) continue;
    out.push_back(u);
  }
  return out;
}

Timestamp time_quantile(const ActivityLog& log, double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0)) throw UsageError("quantile must lie in (0, 1)");
  if (log.empty()) throw UsageError("cannot take a time quantile of an empty log");
  std::vector<Timestamp> times;
  times.reserve(log.size());
  for (std::uint32_t k = 0; k < log.kind_count(); ++k) {
    for (const Action& a : log.stream(KindId{k}).events()) times.push_back(a.time);
  }
  auto pos = static_cast<std::size_t>(std::floor(quantile * static_cast<double>(times.size())));
  pos = std::min(pos, times.size() - 1);
  std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(pos), times.end());
  return times[pos];
}

}  // namespace pme
