#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "analogwave/calendar.hpp"

namespace analogwave {

using SeriesId = int;

/// Malformed input file. Carries the 1-based line number when one applies.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& source, int line, const std::string& what);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

enum class SeriesKind { station_daily, index_monthly, index_daily };

std::string to_string(SeriesKind kind);
SeriesKind parse_series_kind(const std::string& text);

struct SeriesMeta {
  SeriesId series_id = 0;
  std::string name;
  std::string country;
  SeriesKind kind = SeriesKind::station_daily;
  std::optional<double> latitude;
  std::optional<double> longitude;
  std::string units;
};

/// One series on the day axis [1, days]. Slot k holds day k + 1.
struct DailySeries {
  SeriesMeta meta;
  std::vector<double> values;
  std::vector<std::uint8_t> missing;

  int days() const { return static_cast<int>(values.size()); }
};

struct MonthlyRow {
  int year = 0;
  int month = 0;
  std::optional<double> value;  // nullopt: listed but missing
};

inline const std::vector<double> kDefaultSentinels = {9999.9, 999.9};

/// Values/missing are row-major [series x days]; column 0 is day 1.
class RawPanel {
 public:
  RawPanel() = default;
  RawPanel(std::vector<SeriesMeta> metas, int days, std::vector<double> values,
           std::vector<std::uint8_t> missing);

  int series_count() const { return static_cast<int>(metas_.size()); }
  int days() const { return days_; }
  DayIndex last_day() const { return days_; }

  const std::vector<SeriesMeta>& metas() const { return metas_; }
  const SeriesMeta& meta(int row) const { return metas_.at(row); }

  /// Row of a series id; throws std::out_of_range if absent.
  int row_of(SeriesId id) const;
  bool contains(SeriesId id) const;

  std::span<const double> values(int row) const;
  std::span<const std::uint8_t> missing(int row) const;

  bool is_missing(int row, DayIndex j) const { return missing_[offset(row, j)] != 0; }
  double value(int row, DayIndex j) const { return values_[offset(row, j)]; }

  /// Test and fixture hook.
  void set_value(int row, DayIndex j, std::optional<double> value);

 private:
  std::size_t offset(int row, DayIndex j) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(days_) +
           static_cast<std::size_t>(j - 1);
  }

  std::vector<SeriesMeta> metas_;
  int days_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
};

/// Parses a `date,value` CSV onto the axis [1, days]. Rows dated after `days`
/// are dropped; empty fields and sentinel values are missing.
DailySeries parse_daily_csv(std::istream& in, const SeriesMeta& meta, int days,
                            const std::vector<double>& sentinels = kDefaultSentinels,
                            const std::string& source = "<stream>");
DailySeries parse_daily_csv(const std::string& path, const SeriesMeta& meta, int days,
                            const std::vector<double>& sentinels = kDefaultSentinels);

std::vector<MonthlyRow> parse_monthly_csv(std::istream& in,
                                          const std::vector<double>& sentinels = kDefaultSentinels,
                                          const std::string& source = "<stream>");

/// Broadcasts monthly values to every day of their month over [1, days].
DailySeries expand_monthly(const std::vector<MonthlyRow>& rows, const SeriesMeta& meta, int days);

/// Writes the `date,value` form back out (missing days omitted).
void write_daily_csv(std::ostream& out, const DailySeries& series);

RawPanel build_panel(std::vector<DailySeries> series);

struct ManifestEntry {
  SeriesMeta meta;
  std::string path;  // resolved against the manifest's directory
  std::vector<double> missing_sentinels = kDefaultSentinels;
};

std::vector<ManifestEntry> load_manifest(const std::string& path);

/// Loads every manifest entry onto [1, days] and merges them into a panel.
RawPanel load_panel_from_manifest(const std::string& manifest_path, int days);

/// Wide CSV: `date,<id>,<id>,...` one row per day, empty cell when missing,
/// plus a JSON sidecar with the series metadata.
void write_panel(const RawPanel& panel, const std::string& csv_path, const std::string& meta_path);
RawPanel read_panel(const std::string& csv_path, const std::string& meta_path);

}  // namespace analogwave
