#include "analogwave/climatology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "analogwave/format.hpp"
#include "analogwave/parallel.hpp"

namespace analogwave {

std::string to_string(Direction d) {
  return d == Direction::heat ? "heat" : "cold";
}

Direction parse_direction(const std::string& text) {
  if (text == "heat") return Direction::heat;
  if (text == "cold") return Direction::cold;
  throw std::invalid_argument("unknown direction '" + text + "'");
}

Climatology::Climatology(std::vector<SeriesId> ids, YearRange years)
    : ids_(std::move(ids)), years_(years), stats_(ids_.size()) {}

int Climatology::row_of(SeriesId id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) throw std::out_of_range("no climatology for series " + std::to_string(id));
  return static_cast<int>(it - ids_.begin());
}

const SlotStats& Climatology::for_day(int row, DayIndex j) const {
  return at(row, slot_position(slot_of(index_to_date(j))));
}

Climatology compute_climatology(const RawPanel& panel, YearRange years, unsigned workers) {
  if (years.first > years.last) throw std::invalid_argument("baseline years out of order");
  std::vector<SeriesId> ids;
  for (const auto& m : panel.metas()) ids.push_back(m.series_id);
  Climatology clim(std::move(ids), years);

  const DayIndex first = std::max(1, date_to_index({std::max(years.first, kEpochYear), 1, 1}));
  const DayIndex last =
      std::min(panel.days(), years.last < kEpochYear ? 0 : date_to_index({years.last, 12, 31}));
  std::vector<int> slot_of_day;
  slot_of_day.reserve(std::max(0, last - first + 1));
  for (DayIndex j = first; j <= last; ++j) slot_of_day.push_back(slot_position(slot_of(index_to_date(j))));

  parallel_for(static_cast<std::size_t>(panel.series_count()), workers, [&](std::size_t r) {
    const int row = static_cast<int>(r);
    std::array<double, kSlotCount> sum{};
    std::array<int, kSlotCount> count{};
    for (DayIndex j = first; j <= last; ++j) {
      if (panel.is_missing(row, j)) continue;
      const int s = slot_of_day[j - first];
      sum[s] += panel.value(row, j);
      ++count[s];
    }
    std::array<double, kSlotCount> mean{};
    for (int s = 0; s < kSlotCount; ++s) mean[s] = count[s] > 0 ? sum[s] / count[s] : 0.0;
    std::array<double, kSlotCount> ss{};
    for (DayIndex j = first; j <= last; ++j) {
      if (panel.is_missing(row, j)) continue;
      const int s = slot_of_day[j - first];
      const double d = panel.value(row, j) - mean[s];
      ss[s] += d * d;
    }
    for (int s = 0; s < kSlotCount; ++s) {
      auto& st = clim.at(row, s);
      st.count = count[s];
      if (count[s] >= 2) {
        st.baseline = mean[s];
        st.sd = std::sqrt(ss[s] / (count[s] - 1));
      }
    }
  });
  return clim;
}

void write_climatology_csv(std::ostream& out, const Climatology& clim) {
  out << "series_id,month,day,baseline,sd,count\n";
  for (std::size_t r = 0; r < clim.series_ids().size(); ++r) {
    for (int s = 0; s < kSlotCount; ++s) {
      const auto slot = slot_at(s);
      const auto& st = clim.at(static_cast<int>(r), s);
      out << clim.series_ids()[r] << ',' << slot.month << ',' << slot.day << ',';
      if (st.defined()) out << format_double(st.baseline) << ',' << format_double(st.sd);
      else out << ',';
      out << ',' << st.count << '\n';
    }
  }
}

Climatology read_climatology_csv(std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || trim(line) != "series_id,month,day,baseline,sd,count") {
    throw InputError(source, 1, "expected climatology header");
  }
  ++line_no;
  struct Row {
    SeriesId id;
    int pos;
    SlotStats st;
  };
  std::vector<Row> rows;
  std::vector<SeriesId> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 6) throw InputError(source, line_no, "expected 6 fields");
    const auto id = parse_integer(f[0]);
    const auto month = parse_integer(f[1]);
    const auto day = parse_integer(f[2]);
    const auto count = parse_integer(f[5]);
    if (!id || !month || !day || !count || *month < 1 || *month > 12 || *day < 1 ||
        *day > days_in_month(2000, static_cast<int>(*month))) {
      throw InputError(source, line_no, "malformed climatology row");
    }
    SlotStats st;
    st.count = static_cast<int>(*count);
    if (st.defined()) {
      const auto b = parse_double(f[3]);
      const auto sd = parse_double(f[4]);
      if (!b || !sd) throw InputError(source, line_no, "missing baseline/sd");
      st.baseline = *b;
      st.sd = *sd;
    }
    if (ids.empty() || ids.back() != *id) ids.push_back(static_cast<SeriesId>(*id));
    rows.push_back({static_cast<SeriesId>(*id),
                    slot_position({static_cast<int>(*month), static_cast<int>(*day)}), st});
  }
  Climatology clim(ids, {});
  for (const auto& r : rows) clim.at(clim.row_of(r.id), r.pos) = r.st;
  return clim;
}

AnomalyMatrix AnomalyMatrix::from_values(std::vector<SeriesId> ids, int days,
                                         std::vector<double> values,
                                         std::vector<std::uint8_t> missing) {
  const auto cells = ids.size() * static_cast<std::size_t>(days);
  if (values.size() != cells || missing.size() != cells) {
    throw std::invalid_argument("anomaly storage does not match series x days");
  }
  AnomalyMatrix m;
  m.ids_ = std::move(ids);
  m.days_ = days;
  m.values_ = std::move(values);
  m.missing_ = std::move(missing);
  m.prefix_.assign(m.ids_.size() * (days + 1), 0.0);
  m.counts_.assign(m.ids_.size() * (days + 1), 0);
  for (int r = 0; r < m.series_count(); ++r) m.rebuild_prefix(r);
  return m;
}

int AnomalyMatrix::row_of(SeriesId id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) throw std::out_of_range("series " + std::to_string(id) + " has no anomalies");
  return static_cast<int>(it - ids_.begin());
}

std::span<const double> AnomalyMatrix::prefix_sums(int row) const {
  return {prefix_.data() + static_cast<std::size_t>(row) * (days_ + 1),
          static_cast<std::size_t>(days_ + 1)};
}

std::span<const std::int32_t> AnomalyMatrix::missing_counts(int row) const {
  return {counts_.data() + static_cast<std::size_t>(row) * (days_ + 1),
          static_cast<std::size_t>(days_ + 1)};
}

std::optional<double> AnomalyMatrix::window_total(int row, DayIndex first, DayIndex last) const {
  if (first < 1 || last > days_ || first > last) return std::nullopt;
  const auto p = prefix_sums(row);
  const auto m = missing_counts(row);
  if (m[last] - m[first - 1] != 0) return std::nullopt;
  return p[last] - p[first - 1];
}

void AnomalyMatrix::set_anomaly(int row, DayIndex j, std::optional<double> value) {
  values_[cell(row, j)] = value.value_or(0.0);
  missing_[cell(row, j)] = value ? 0 : 1;
  rebuild_prefix(row);
}

void AnomalyMatrix::rebuild_prefix(int row) {
  const auto base = static_cast<std::size_t>(row) * (days_ + 1);
  prefix_[base] = 0.0;
  counts_[base] = 0;
  for (DayIndex j = 1; j <= days_; ++j) {
    const auto c = cell(row, j);
    prefix_[base + j] = prefix_[base + j - 1] + (missing_[c] ? 0.0 : values_[c]);
    counts_[base + j] = counts_[base + j - 1] + (missing_[c] ? 1 : 0);
  }
}

AnomalyMatrix anomalize(const RawPanel& panel, const Climatology& clim, unsigned workers) {
  const auto rows = static_cast<std::size_t>(panel.series_count());
  const int days = panel.days();
  std::vector<SeriesId> ids;
  std::vector<int> clim_rows;
  for (const auto& m : panel.metas()) {
    ids.push_back(m.series_id);
    clim_rows.push_back(clim.row_of(m.series_id));
  }
  std::vector<int> slot_of_day(days + 1, 0);
  for (DayIndex j = 1; j <= days; ++j) slot_of_day[j] = slot_position(slot_of(index_to_date(j)));

  std::vector<double> values(rows * days, 0.0);
  std::vector<std::uint8_t> missing(rows * days, 1);
  parallel_for(rows, workers, [&](std::size_t r) {
    const int row = static_cast<int>(r);
    for (DayIndex j = 1; j <= days; ++j) {
      const auto& st = clim.at(clim_rows[r], slot_of_day[j]);
      if (panel.is_missing(row, j) || !st.defined()) continue;
      values[r * days + (j - 1)] = panel.value(row, j) - st.baseline;
      missing[r * days + (j - 1)] = 0;
    }
  });
  return AnomalyMatrix::from_values(std::move(ids), days, std::move(values), std::move(missing));
}

std::vector<ExtremeEvent> detect_extremes(const AnomalyMatrix& anoms, const Climatology& clim,
                                          SeriesId target, DayRange range, double multiplier) {
  const int arow = anoms.row_of(target);
  const int crow = clim.row_of(target);
  std::vector<ExtremeEvent> events;
  for (DayIndex j = std::max(1, range.first); j <= std::min(anoms.days(), range.last); ++j) {
    if (anoms.is_missing(arow, j)) continue;
    const auto& st = clim.for_day(crow, j);
    if (!st.defined()) continue;
    const double a = anoms.anomaly(arow, j);
    if (std::abs(a) > multiplier * st.sd) {
      events.push_back({target, j, a > 0 ? Direction::heat : Direction::cold, a, st.sd});
    }
  }
  return events;
}

std::vector<DayIndex> extreme_days(const std::vector<ExtremeEvent>& events, Direction direction) {
  std::vector<DayIndex> days;
  for (const auto& e : events) {
    if (e.direction == direction) days.push_back(e.day);
  }
  std::sort(days.begin(), days.end());
  days.erase(std::unique(days.begin(), days.end()), days.end());
  return days;
}

std::vector<WaveGroup> group_waves(std::vector<ExtremeEvent> events) {
  std::sort(events.begin(), events.end(),
            [](const ExtremeEvent& a, const ExtremeEvent& b) { return a.day < b.day; });
  std::vector<WaveGroup> groups;
  for (const auto& e : events) {
    if (!groups.empty()) {
      auto& g = groups.back();
      if (g.target_series != e.target_series || g.direction != e.direction) {
        throw std::invalid_argument("group_waves expects one target and direction");
      }
      if (e.day == g.last_day) continue;
      if (e.day == g.last_day + 1) {
        g.last_day = e.day;
        g.member_days.push_back(e.day);
        continue;
      }
    }
    groups.push_back({e.target_series, e.direction, e.day, e.day, {e.day}});
  }
  return groups;
}

}  // namespace analogwave
