#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "analogwave/climatology.hpp"

namespace analogwave {

inline constexpr int kMinLeadTime = 14;
inline constexpr int kMaxLeadTime = 365;
inline constexpr int kMaxWindowLength = 365;
inline constexpr int kQuorumSize = 4;
inline constexpr int kQuorumSpacingDays = 30;

enum class Side { above_max, below_min };

std::string to_string(Side side);
Side parse_side(const std::string& text);

struct Firing {
  DayIndex day = 0;
  Side side = Side::above_max;

  bool operator==(const Firing&) const = default;
};

/// Circular run of `length_months` calendar months starting at `start_month`.
struct SeasonalWindow {
  int start_month = 1;
  int length_months = 1;

  bool contains(int month) const { return (month - start_month + 12) % 12 < length_months; }
  bool operator==(const SeasonalWindow&) const = default;
};

/// Precursor rule: when the summed anomalies of series i1 and i2 over the n days
/// ending l days before a date leave [min_thr, max_thr], the target is expected
/// to see an extreme of `direction` on that date.
struct Rule {
  SeriesId target = 0;
  Direction direction = Direction::heat;
  SeriesId i1 = 0;
  SeriesId i2 = 0;
  int n = 1;
  int l = kMinLeadTime;
  double min_thr = 0.0;
  double max_thr = 0.0;
  std::vector<Firing> firings;
  std::vector<DayIndex> quorum;
  std::optional<SeasonalWindow> seasonal_window;

  /// `target:direction:i1:i2:n:l`, unique per mined rule.
  std::string key() const;
  bool operator==(const Rule&) const = default;
};

/// Canonical rule order: (i1, i2, l, n, direction, target).
bool rule_order(const Rule& a, const Rule& b);

struct SearchSpace {
  std::vector<SeriesId> series_ids;
  std::vector<int> lead_times;
  std::vector<int> window_lengths;
  bool allow_diagonal = true;

  /// Throws std::invalid_argument on empty or out-of-range sets.
  void validate() const;
};

struct SeriesPair {
  SeriesId i1 = 0;
  SeriesId i2 = 0;

  bool operator==(const SeriesPair&) const = default;
};

/// Unordered pairs over the sorted id set, i1 <= i2 (i1 < i2 without diagonal).
std::vector<SeriesPair> enumerate_pairs(const SearchSpace& space);

struct ShardPlan {
  int shard_count = 1;
  std::vector<int> assignments;  // pair index -> shard

  std::vector<std::size_t> pairs_in(int shard) const;
};

/// Round-robin: pair p goes to shard p % shard_count.
ShardPlan plan_shards(std::size_t pair_count, int shard_count);

/// Sum of x*_{i1} + x*_{i2} over days [j-l-n+1, j-l] via the per-series prefix
/// arrays. nullopt when the window leaves the axis or touches a missing day.
std::optional<double> window_sum(const AnomalyMatrix& anoms, SeriesId i1, SeriesId i2, int l, int n,
                                 DayIndex j);

/// Prefix sums of the combined series x*_{i1} + x*_{i2}. One instance serves
/// every (l, n) for the pair; the miner and the predictor both read it so that
/// threshold comparisons see bit-identical sums.
class PairSignal {
 public:
  PairSignal(const AnomalyMatrix& anoms, SeriesId i1, SeriesId i2);

  int days() const { return days_; }

  /// Sum over the n days ending at `end` (inclusive).
  std::optional<double> sum_ending(DayIndex end, int n) const {
    if (n < 1 || end - n < 0 || end > days_) return std::nullopt;
    if (missing_[end] != missing_[end - n]) return std::nullopt;
    return prefix_[end] - prefix_[end - n];
  }

 private:
  int days_ = 0;
  std::vector<double> prefix_;
  std::vector<std::int32_t> missing_;
};

struct Envelope {
  double min = 0.0;
  double max = 0.0;
};

/// Min/Max of the window sum over learning days that are not in `extreme_days`.
std::optional<Envelope> compute_thresholds(const AnomalyMatrix& anoms, SeriesId i1, SeriesId i2,
                                           int l, int n, DayRange learning,
                                           std::span<const DayIndex> extreme_days);

/// Extreme days whose window sum lies strictly outside the envelope.
std::vector<Firing> find_firings(const AnomalyMatrix& anoms, SeriesId i1, SeriesId i2, int l, int n,
                                 Envelope envelope, std::span<const DayIndex> extreme_days);

/// Greedy chronological selection with > 30 days between consecutive picks.
/// Returns the selection if it has at least four members.
std::optional<std::vector<DayIndex>> qualify(std::span<const Firing> firings);

struct MiningTarget {
  SeriesId series = 0;
  Direction direction = Direction::heat;
  std::vector<DayIndex> extreme_days;  // sorted; only those in the learning range are used
};

struct MineOptions {
  unsigned workers = 1;
  /// When set, each finished shard is stored as `shard-NNNN.jsonl` in this
  /// directory and reused by later runs with the same fingerprint.
  std::string checkpoint_dir;
  std::string fingerprint;
};

/// Every qualifying rule for one pair over the space's (l, n) grid.
std::vector<Rule> mine_pair(const AnomalyMatrix& anoms, const MiningTarget& target, SeriesPair pair,
                            const SearchSpace& space, DayRange learning);

/// Mines all pairs of the plan, shard by shard, and returns rules in canonical
/// order. The result does not depend on shard or worker counts.
std::vector<Rule> mine(const AnomalyMatrix& anoms, const MiningTarget& target,
                       const SearchSpace& space, DayRange learning, const ShardPlan& plan,
                       const MineOptions& options = {});

}  // namespace analogwave
