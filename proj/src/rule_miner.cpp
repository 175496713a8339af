#include "analogwave/rule_miner.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "analogwave/format.hpp"
#include "analogwave/parallel.hpp"
#include "analogwave/rule_io.hpp"

namespace analogwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Run = std::pair<DayIndex, DayIndex>;

// Maximal runs of learning days not in `extreme_days`.
std::vector<Run> envelope_runs(DayRange learning, std::span<const DayIndex> extreme_days) {
  std::vector<Run> runs;
  DayIndex start = learning.first;
  for (DayIndex e : extreme_days) {
    if (e < learning.first || e > learning.last) continue;
    if (e > start) runs.emplace_back(start, e - 1);
    start = std::max(start, e + 1);
  }
  if (start <= learning.last) runs.emplace_back(start, learning.last);
  return runs;
}

std::vector<DayIndex> sorted_in_range(std::span<const DayIndex> days, DayRange range) {
  std::vector<DayIndex> out;
  for (DayIndex d : days) {
    if (range.contains(d)) out.push_back(d);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double range_max(const double* v, int first, int last) {
  double m0 = -kInf, m1 = -kInf, m2 = -kInf, m3 = -kInf;
  int t = first;
  for (; t + 3 <= last; t += 4) {
    m0 = std::max(m0, v[t]);
    m1 = std::max(m1, v[t + 1]);
    m2 = std::max(m2, v[t + 2]);
    m3 = std::max(m3, v[t + 3]);
  }
  for (; t <= last; ++t) m0 = std::max(m0, v[t]);
  return std::max(std::max(m0, m1), std::max(m2, m3));
}

double range_min(const double* v, int first, int last) {
  double m0 = kInf, m1 = kInf, m2 = kInf, m3 = kInf;
  int t = first;
  for (; t + 3 <= last; t += 4) {
    m0 = std::min(m0, v[t]);
    m1 = std::min(m1, v[t + 1]);
    m2 = std::min(m2, v[t + 2]);
    m3 = std::min(m3, v[t + 3]);
  }
  for (; t <= last; ++t) m0 = std::min(m0, v[t]);
  return std::min(std::min(m0, m1), std::min(m2, m3));
}

std::vector<Firing> firings_for(const PairSignal& signal, int l, int n, Envelope env,
                                std::span<const DayIndex> extreme_days) {
  std::vector<Firing> firings;
  for (DayIndex e : extreme_days) {
    const auto s = signal.sum_ending(e - l, n);
    if (!s) continue;
    if (*s > env.max) firings.push_back({e, Side::above_max});
    else if (*s < env.min) firings.push_back({e, Side::below_min});
  }
  return firings;
}

std::string shard_path(const std::string& dir, int shard) {
  char name[32];
  std::snprintf(name, sizeof name, "shard-%04d.jsonl", shard);
  return (std::filesystem::path(dir) / name).string();
}

// Drops stale shard files when the stored fingerprint differs from ours.
void prepare_checkpoint_dir(const MineOptions& options) {
  namespace fs = std::filesystem;
  fs::create_directories(options.checkpoint_dir);
  const auto stamp = fs::path(options.checkpoint_dir) / "fingerprint";
  std::string previous;
  if (fs::exists(stamp)) previous = read_file(stamp.string());
  if (previous == options.fingerprint) return;
  for (const auto& entry : fs::directory_iterator(options.checkpoint_dir)) {
    if (entry.path().extension() == ".jsonl") fs::remove(entry.path());
  }
  write_file_atomic(stamp.string(), options.fingerprint);
}

}  // namespace

std::string to_string(Side side) {
  return side == Side::above_max ? "above_max" : "below_min";
}

Side parse_side(const std::string& text) {
  if (text == "above_max") return Side::above_max;
  if (text == "below_min") return Side::below_min;
  throw std::invalid_argument("unknown side '" + text + "'");
}

std::string Rule::key() const {
  return std::to_string(target) + ":" + to_string(direction) + ":" + std::to_string(i1) + ":" +
         std::to_string(i2) + ":" + std::to_string(n) + ":" + std::to_string(l);
}

bool rule_order(const Rule& a, const Rule& b) {
  return std::tie(a.i1, a.i2, a.l, a.n, a.direction, a.target) <
         std::tie(b.i1, b.i2, b.l, b.n, b.direction, b.target);
}

void SearchSpace::validate() const {
  if (series_ids.empty()) throw std::invalid_argument("search space has no series");
  if (lead_times.empty()) throw std::invalid_argument("search space has no lead times");
  if (window_lengths.empty()) throw std::invalid_argument("search space has no window lengths");
  for (int l : lead_times) {
    if (l < kMinLeadTime || l > kMaxLeadTime) {
      throw std::invalid_argument("lead time " + std::to_string(l) + " outside [14, 365]");
    }
  }
  for (int n : window_lengths) {
    if (n < 1 || n > kMaxWindowLength) {
      throw std::invalid_argument("window length " + std::to_string(n) + " outside [1, 365]");
    }
  }
}

std::vector<SeriesPair> enumerate_pairs(const SearchSpace& space) {
  auto ids = space.series_ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<SeriesPair> pairs;
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = space.allow_diagonal ? a : a + 1; b < ids.size(); ++b) {
      pairs.push_back({ids[a], ids[b]});
    }
  }
  return pairs;
}

std::vector<std::size_t> ShardPlan::pairs_in(int shard) const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < assignments.size(); ++p) {
    if (assignments[p] == shard) out.push_back(p);
  }
  return out;
}

ShardPlan plan_shards(std::size_t pair_count, int shard_count) {
  if (shard_count < 1) throw std::invalid_argument("shard_count must be >= 1");
  ShardPlan plan;
  plan.shard_count = shard_count;
  plan.assignments.resize(pair_count);
  for (std::size_t p = 0; p < pair_count; ++p) plan.assignments[p] = static_cast<int>(p % shard_count);
  return plan;
}

std::optional<double> window_sum(const AnomalyMatrix& anoms, SeriesId i1, SeriesId i2, int l, int n,
                                 DayIndex j) {
  const DayIndex last = j - l;
  const DayIndex first = last - n + 1;
  const auto a = anoms.window_total(anoms.row_of(i1), first, last);
  if (!a) return std::nullopt;
  const auto b = anoms.window_total(anoms.row_of(i2), first, last);
  if (!b) return std::nullopt;
  return *a + *b;
}

PairSignal::PairSignal(const AnomalyMatrix& anoms, SeriesId i1, SeriesId i2)
    : days_(anoms.days()), prefix_(days_ + 1, 0.0), missing_(days_ + 1, 0) {
  const int r1 = anoms.row_of(i1);
  const int r2 = anoms.row_of(i2);
  for (DayIndex j = 1; j <= days_; ++j) {
    const bool gap = anoms.is_missing(r1, j) || anoms.is_missing(r2, j);
    prefix_[j] = prefix_[j - 1] + (gap ? 0.0 : anoms.anomaly(r1, j) + anoms.anomaly(r2, j));
    missing_[j] = missing_[j - 1] + (gap ? 1 : 0);
  }
}

std::optional<Envelope> compute_thresholds(const AnomalyMatrix& anoms, SeriesId i1, SeriesId i2,
                                           int l, int n, DayRange learning,
                                           std::span<const DayIndex> extreme_days) {
  const PairSignal signal(anoms, i1, i2);
  const auto excluded = sorted_in_range(extreme_days, learning);
  double mx = -kInf, mn = kInf;
  for (const auto& [a, b] : envelope_runs(learning, excluded)) {
    for (DayIndex j = a; j <= b; ++j) {
      if (const auto s = signal.sum_ending(j - l, n)) {
        mx = std::max(mx, *s);
        mn = std::min(mn, *s);
      }
    }
  }
  if (mx == -kInf) return std::nullopt;
  return Envelope{mn, mx};
}

std::vector<Firing> find_firings(const AnomalyMatrix& anoms, SeriesId i1, SeriesId i2, int l, int n,
                                 Envelope envelope, std::span<const DayIndex> extreme_days) {
  const PairSignal signal(anoms, i1, i2);
  std::vector<DayIndex> days(extreme_days.begin(), extreme_days.end());
  std::sort(days.begin(), days.end());
  return firings_for(signal, l, n, envelope, days);
}

std::optional<std::vector<DayIndex>> qualify(std::span<const Firing> firings) {
  std::vector<DayIndex> selected;
  for (const auto& f : firings) {
    if (selected.empty() || f.day - selected.back() > kQuorumSpacingDays) selected.push_back(f.day);
  }
  if (static_cast<int>(selected.size()) < kQuorumSize) return std::nullopt;
  return selected;
}

std::vector<Rule> mine_pair(const AnomalyMatrix& anoms, const MiningTarget& target, SeriesPair pair,
                            const SearchSpace& space, DayRange learning) {
  const PairSignal signal(anoms, pair.i1, pair.i2);
  const int days = anoms.days();
  learning.last = std::min(learning.last, days);
  const auto extremes = sorted_in_range(target.extreme_days, learning);
  const auto runs = envelope_runs(learning, extremes);

  // hi/lo hold the window sum ending at t, or -inf/+inf where undefined, so
  // the envelope scan is a plain contiguous max/min.
  auto unique_sorted = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const auto leads = unique_sorted(space.lead_times);
  const auto lengths = unique_sorted(space.window_lengths);

  std::vector<double> hi(days + 1), lo(days + 1);
  std::vector<Rule> rules;
  for (int n : lengths) {
    for (DayIndex t = 0; t <= days; ++t) {
      const auto s = signal.sum_ending(t, n);
      hi[t] = s ? *s : -kInf;
      lo[t] = s ? *s : kInf;
    }
    for (int l : leads) {
      double mx = -kInf, mn = kInf;
      for (const auto& [a, b] : runs) {
        const int first = std::max(a - l, 0);
        const int last = b - l;
        if (last < first) continue;
        mx = std::max(mx, range_max(hi.data(), first, last));
        mn = std::min(mn, range_min(lo.data(), first, last));
      }
      if (mx == -kInf) continue;
      const Envelope env{mn, mx};
      auto firings = firings_for(signal, l, n, env, extremes);
      auto quorum = qualify(firings);
      if (!quorum) continue;
      Rule rule;
      rule.target = target.series;
      rule.direction = target.direction;
      rule.i1 = pair.i1;
      rule.i2 = pair.i2;
      rule.n = n;
      rule.l = l;
      rule.min_thr = env.min;
      rule.max_thr = env.max;
      rule.firings = std::move(firings);
      rule.quorum = std::move(*quorum);
      rules.push_back(std::move(rule));
    }
  }
  return rules;
}

std::vector<Rule> mine(const AnomalyMatrix& anoms, const MiningTarget& target,
                       const SearchSpace& space, DayRange learning, const ShardPlan& plan,
                       const MineOptions& options) {
  space.validate();
  const auto pairs = enumerate_pairs(space);
  if (plan.assignments.size() != pairs.size()) {
    throw std::invalid_argument("shard plan covers " + std::to_string(plan.assignments.size()) +
                                " pairs, search space has " + std::to_string(pairs.size()));
  }
  const bool checkpoint = !options.checkpoint_dir.empty();
  if (checkpoint) prepare_checkpoint_dir(options);

  std::vector<std::vector<Rule>> per_shard(static_cast<std::size_t>(plan.shard_count));
  parallel_for(per_shard.size(), options.workers, [&](std::size_t shard) {
    const int id = static_cast<int>(shard);
    const std::string path = checkpoint ? shard_path(options.checkpoint_dir, id) : std::string();
    if (checkpoint && std::filesystem::exists(path)) {
      per_shard[shard] = read_rules_file(path);
      return;
    }
    auto& out = per_shard[shard];
    for (std::size_t p : plan.pairs_in(id)) {
      auto rules = mine_pair(anoms, target, pairs[p], space, learning);
      std::move(rules.begin(), rules.end(), std::back_inserter(out));
    }
    std::sort(out.begin(), out.end(), rule_order);
    if (checkpoint) write_file_atomic(path, rules_to_string(out));
  });

  std::vector<Rule> merged;
  for (auto& rules : per_shard) std::move(rules.begin(), rules.end(), std::back_inserter(merged));
  std::sort(merged.begin(), merged.end(), rule_order);
  return merged;
}

}  // namespace analogwave
