#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "analogwave/calendar.hpp"
#include "analogwave/ingest.hpp"

namespace analogwave {

enum class Direction { heat, cold };

std::string to_string(Direction d);
Direction parse_direction(const std::string& text);

struct YearRange {
  int first = 1973;
  int last = 2013;
};

struct DayRange {
  DayIndex first = 1;
  DayIndex last = 1;

  bool contains(DayIndex j) const { return j >= first && j <= last; }
  int size() const { return last - first + 1; }
};

struct SlotStats {
  double baseline = 0.0;
  double sd = 0.0;
  int count = 0;

  bool defined() const { return count >= 2; }
};

/// Per-series, per-calendar-slot mean and sample SD over a range of years.
class Climatology {
 public:
  Climatology() = default;
  Climatology(std::vector<SeriesId> ids, YearRange years);

  const std::vector<SeriesId>& series_ids() const { return ids_; }
  YearRange years() const { return years_; }

  int row_of(SeriesId id) const;
  const SlotStats& at(int row, int slot_pos) const { return stats_[row][slot_pos]; }
  SlotStats& at(int row, int slot_pos) { return stats_[row][slot_pos]; }
  const SlotStats& for_day(int row, DayIndex j) const;

 private:
  std::vector<SeriesId> ids_;
  YearRange years_;
  std::vector<std::array<SlotStats, kSlotCount>> stats_;
};

Climatology compute_climatology(const RawPanel& panel, YearRange years, unsigned workers = 1);

/// `series_id,month,day,baseline,sd,count`; undefined slots leave baseline/sd empty.
void write_climatology_csv(std::ostream& out, const Climatology& clim);
Climatology read_climatology_csv(std::istream& in, const std::string& source = "<stream>");

/// Anomalies x - baseline with per-series prefix sums and prefix missing counts.
/// Prefix index t covers days [1, t]; prefix[0] = 0 and missing cells add 0.
class AnomalyMatrix {
 public:
  AnomalyMatrix() = default;

  /// Builds from explicit anomalies (row-major [series x days]).
  static AnomalyMatrix from_values(std::vector<SeriesId> ids, int days, std::vector<double> values,
                                   std::vector<std::uint8_t> missing);

  int series_count() const { return static_cast<int>(ids_.size()); }
  int days() const { return days_; }
  const std::vector<SeriesId>& series_ids() const { return ids_; }
  int row_of(SeriesId id) const;

  double anomaly(int row, DayIndex j) const { return values_[cell(row, j)]; }
  bool is_missing(int row, DayIndex j) const { return missing_[cell(row, j)] != 0; }

  std::span<const double> prefix_sums(int row) const;
  std::span<const std::int32_t> missing_counts(int row) const;

  /// Sum over days [first, last] of one series; nullopt if out of the axis or
  /// any day is missing.
  std::optional<double> window_total(int row, DayIndex first, DayIndex last) const;

  /// Test hook: overwrite one cell and rebuild that row's prefix arrays.
  void set_anomaly(int row, DayIndex j, std::optional<double> value);

 private:
  std::size_t cell(int row, DayIndex j) const {
    return static_cast<std::size_t>(row) * days_ + static_cast<std::size_t>(j - 1);
  }
  void rebuild_prefix(int row);

  std::vector<SeriesId> ids_;
  int days_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
  std::vector<double> prefix_;        // rows x (days + 1)
  std::vector<std::int32_t> counts_;  // rows x (days + 1)
};

AnomalyMatrix anomalize(const RawPanel& panel, const Climatology& clim, unsigned workers = 1);

struct ExtremeEvent {
  SeriesId target_series = 0;
  DayIndex day = 0;
  Direction direction = Direction::heat;
  double anomaly = 0.0;
  double sd = 0.0;
};

/// Days in `range` where |anomaly| > multiplier * sd (strict), ordered by day.
std::vector<ExtremeEvent> detect_extremes(const AnomalyMatrix& anoms, const Climatology& clim,
                                          SeriesId target, DayRange range, double multiplier = 2.0);

std::vector<DayIndex> extreme_days(const std::vector<ExtremeEvent>& events, Direction direction);

struct WaveGroup {
  SeriesId target_series = 0;
  Direction direction = Direction::heat;
  DayIndex first_day = 0;
  DayIndex last_day = 0;
  std::vector<DayIndex> member_days;
};

/// Maximal runs of consecutive days. Events must share target and direction.
std::vector<WaveGroup> group_waves(std::vector<ExtremeEvent> events);

}  // namespace analogwave
