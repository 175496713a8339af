#include "analogwave/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "analogwave/format.hpp"
#include "json.hpp"

namespace analogwave {

namespace {

using nlohmann::json;

bool is_sentinel(double v, const std::vector<double>& sentinels) {
  return std::find(sentinels.begin(), sentinels.end(), v) != sentinels.end();
}

DailySeries empty_series(const SeriesMeta& meta, int days) {
  DailySeries s;
  s.meta = meta;
  s.values.assign(static_cast<std::size_t>(days), 0.0);
  s.missing.assign(static_cast<std::size_t>(days), 1);
  return s;
}

bool next_content_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) return true;
  }
  return false;
}

void expect_header(std::istream& in, const std::vector<std::string>& columns,
                   const std::string& source, int& line_no) {
  std::string line;
  if (!next_content_line(in, line, line_no)) {
    throw InputError(source, line_no, "missing header row");
  }
  auto fields = split_fields(line);
  bool ok = fields.size() == columns.size();
  for (std::size_t k = 0; ok && k < columns.size(); ++k) ok = fields[k] == columns[k];
  if (!ok) {
    std::string want;
    for (const auto& c : columns) want += (want.empty() ? "" : ",") + c;
    throw InputError(source, line_no, "expected header '" + want + "'");
  }
}

json meta_to_json(const SeriesMeta& m) {
  json j;
  j["series_id"] = m.series_id;
  j["name"] = m.name;
  j["country"] = m.country;
  j["kind"] = to_string(m.kind);
  j["lat"] = m.latitude ? json(*m.latitude) : json(nullptr);
  j["lon"] = m.longitude ? json(*m.longitude) : json(nullptr);
  j["units"] = m.units;
  return j;
}

SeriesMeta meta_from_json(const json& j, const std::string& source) {
  SeriesMeta m;
  try {
    m.series_id = j.at("series_id").get<int>();
    m.name = j.value("name", "");
    m.country = j.value("country", "");
    m.kind = parse_series_kind(j.value("kind", "station_daily"));
    if (j.contains("lat") && !j.at("lat").is_null()) m.latitude = j.at("lat").get<double>();
    if (j.contains("lon") && !j.at("lon").is_null()) m.longitude = j.at("lon").get<double>();
    m.units = j.value("units", "");
  } catch (const json::exception& e) {
    throw InputError(source, 0, std::string("bad series entry: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(source, 0, e.what());
  }
  if (m.series_id < 1) throw InputError(source, 0, "series_id must be >= 1");
  if (m.latitude && (*m.latitude < -90.0 || *m.latitude > 90.0)) {
    throw InputError(source, 0, "latitude out of range for series " + std::to_string(m.series_id));
  }
  if (m.longitude && (*m.longitude < -180.0 || *m.longitude > 180.0)) {
    throw InputError(source, 0, "longitude out of range for series " + std::to_string(m.series_id));
  }
  if (m.kind == SeriesKind::station_daily && (!m.latitude || !m.longitude)) {
    throw InputError(source, 0,
                     "station series " + std::to_string(m.series_id) + " needs lat and lon");
  }
  return m;
}

}  // namespace

InputError::InputError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what
                                  : source + ": " + what),
      line_(line) {}

std::string to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::station_daily: return "station_daily";
    case SeriesKind::index_monthly: return "index_monthly";
    case SeriesKind::index_daily: return "index_daily";
  }
  return "station_daily";
}

SeriesKind parse_series_kind(const std::string& text) {
  if (text == "station_daily") return SeriesKind::station_daily;
  if (text == "index_monthly") return SeriesKind::index_monthly;
  if (text == "index_daily") return SeriesKind::index_daily;
  throw std::invalid_argument("unknown series kind '" + text + "'");
}

RawPanel::RawPanel(std::vector<SeriesMeta> metas, int days, std::vector<double> values,
                   std::vector<std::uint8_t> missing)
    : metas_(std::move(metas)), days_(days), values_(std::move(values)), missing_(std::move(missing)) {
  const auto cells = metas_.size() * static_cast<std::size_t>(days_);
  if (values_.size() != cells || missing_.size() != cells) {
    throw std::invalid_argument("panel storage does not match series x days");
  }
}

int RawPanel::row_of(SeriesId id) const {
  for (int r = 0; r < series_count(); ++r) {
    if (metas_[r].series_id == id) return r;
  }
  throw std::out_of_range("series " + std::to_string(id) + " not in panel");
}

bool RawPanel::contains(SeriesId id) const {
  return std::any_of(metas_.begin(), metas_.end(),
                     [id](const SeriesMeta& m) { return m.series_id == id; });
}

std::span<const double> RawPanel::values(int row) const {
  return {values_.data() + static_cast<std::size_t>(row) * days_, static_cast<std::size_t>(days_)};
}

std::span<const std::uint8_t> RawPanel::missing(int row) const {
  return {missing_.data() + static_cast<std::size_t>(row) * days_, static_cast<std::size_t>(days_)};
}

void RawPanel::set_value(int row, DayIndex j, std::optional<double> value) {
  values_[offset(row, j)] = value.value_or(0.0);
  missing_[offset(row, j)] = value ? 0 : 1;
}

DailySeries parse_daily_csv(std::istream& in, const SeriesMeta& meta, int days,
                            const std::vector<double>& sentinels, const std::string& source) {
  int line_no = 0;
  expect_header(in, {"date", "value"}, source, line_no);
  auto series = empty_series(meta, days);
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(days), 0);
  std::string line;
  while (next_content_line(in, line, line_no)) {
    const auto fields = split_fields(line);
    if (fields.size() != 2) throw InputError(source, line_no, "expected 2 fields");
    CivilDate date;
    DayIndex j = 0;
    try {
      date = parse_iso_date(fields[0]);
      j = date_to_index(date);
    } catch (const std::out_of_range&) {
      throw InputError(source, line_no, "date " + std::string(fields[0]) + " precedes 1973-01-01");
    } catch (const std::invalid_argument& e) {
      throw InputError(source, line_no, e.what());
    }
    std::optional<double> value;
    if (!fields[1].empty()) {
      value = parse_double(fields[1]);
      if (!value) {
        throw InputError(source, line_no, "malformed value '" + std::string(fields[1]) + "'");
      }
      if (is_sentinel(*value, sentinels)) value.reset();
    }
    if (j > days) continue;
    const auto k = static_cast<std::size_t>(j - 1);
    if (seen[k]) throw InputError(source, line_no, "duplicate date " + to_iso(date));
    seen[k] = 1;
    if (value) {
      series.values[k] = *value;
      series.missing[k] = 0;
    }
  }
  return series;
}

DailySeries parse_daily_csv(const std::string& path, const SeriesMeta& meta, int days,
                            const std::vector<double>& sentinels) {
  std::ifstream in(path);
  if (!in) throw InputError(path, 0, "cannot open file");
  return parse_daily_csv(in, meta, days, sentinels, path);
}

std::vector<MonthlyRow> parse_monthly_csv(std::istream& in, const std::vector<double>& sentinels,
                                          const std::string& source) {
  int line_no = 0;
  expect_header(in, {"year", "month", "value"}, source, line_no);
  std::vector<MonthlyRow> rows;
  std::set<std::pair<int, int>> seen;
  std::string line;
  while (next_content_line(in, line, line_no)) {
    const auto fields = split_fields(line);
    if (fields.size() != 3) throw InputError(source, line_no, "expected 3 fields");
    const auto year = parse_integer(fields[0]);
    const auto month = parse_integer(fields[1]);
    if (!year || !month) throw InputError(source, line_no, "malformed year/month");
    if (*month < 1 || *month > 12) {
      throw InputError(source, line_no, "invalid month " + std::to_string(*month));
    }
    MonthlyRow row{static_cast<int>(*year), static_cast<int>(*month), std::nullopt};
    if (!fields[2].empty()) {
      row.value = parse_double(fields[2]);
      if (!row.value) throw InputError(source, line_no, "malformed value");
      if (is_sentinel(*row.value, sentinels)) row.value.reset();
    }
    if (!seen.insert({row.year, row.month}).second) {
      throw InputError(source, line_no, "duplicate month");
    }
    rows.push_back(row);
  }
  return rows;
}

DailySeries expand_monthly(const std::vector<MonthlyRow>& rows, const SeriesMeta& meta, int days) {
  auto series = empty_series(meta, days);
  std::set<std::pair<int, int>> seen;
  for (const auto& row : rows) {
    if (row.month < 1 || row.month > 12) {
      throw std::invalid_argument("invalid month " + std::to_string(row.month));
    }
    if (!seen.insert({row.year, row.month}).second) {
      throw std::invalid_argument("duplicate month " + std::to_string(row.year) + "-" +
                                  std::to_string(row.month));
    }
    if (row.year < kEpochYear || !row.value) continue;
    const DayIndex first = date_to_index({row.year, row.month, 1});
    const DayIndex last = first + days_in_month(row.year, row.month) - 1;
    for (DayIndex j = first; j <= std::min(last, days); ++j) {
      series.values[j - 1] = *row.value;
      series.missing[j - 1] = 0;
    }
  }
  return series;
}

void write_daily_csv(std::ostream& out, const DailySeries& series) {
  out << "date,value\n";
  for (int k = 0; k < series.days(); ++k) {
    if (series.missing[k]) continue;
    out << to_iso(k + 1) << ',' << format_double(series.values[k]) << '\n';
  }
}

RawPanel build_panel(std::vector<DailySeries> series) {
  if (series.empty()) throw std::invalid_argument("panel needs at least one series");
  const int days = series.front().days();
  std::set<SeriesId> ids;
  std::vector<SeriesMeta> metas;
  std::vector<double> values;
  std::vector<std::uint8_t> missing;
  values.reserve(series.size() * static_cast<std::size_t>(days));
  missing.reserve(values.capacity());
  for (auto& s : series) {
    if (!ids.insert(s.meta.series_id).second) {
      throw std::invalid_argument("duplicate series_id " + std::to_string(s.meta.series_id));
    }
    if (s.days() != days || s.missing.size() != s.values.size()) {
      throw std::invalid_argument("series " + std::to_string(s.meta.series_id) +
                                  " spans " + std::to_string(s.days()) + " days, expected " +
                                  std::to_string(days));
    }
    for (int k = 0; k < days; ++k) {
      if (!s.missing[k] && !std::isfinite(s.values[k])) {
        throw std::invalid_argument("non-finite value in series " +
                                    std::to_string(s.meta.series_id));
      }
    }
    metas.push_back(s.meta);
    values.insert(values.end(), s.values.begin(), s.values.end());
    missing.insert(missing.end(), s.missing.begin(), s.missing.end());
  }
  return RawPanel(std::move(metas), days, std::move(values), std::move(missing));
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InputError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw InputError(path, 0, "manifest must be a JSON array");
  const auto base = std::filesystem::path(path).parent_path();
  std::vector<ManifestEntry> entries;
  for (const auto& item : doc) {
    ManifestEntry e;
    e.meta = meta_from_json(item, path);
    if (!item.contains("path")) {
      throw InputError(path, 0, "series " + std::to_string(e.meta.series_id) + " has no path");
    }
    const std::filesystem::path p = item.at("path").get<std::string>();
    e.path = (p.is_absolute() ? p : base / p).string();
    if (item.contains("missing_sentinels") && !item.at("missing_sentinels").is_null()) {
      e.missing_sentinels = item.at("missing_sentinels").get<std::vector<double>>();
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

RawPanel load_panel_from_manifest(const std::string& manifest_path, int days) {
  const auto entries = load_manifest(manifest_path);
  std::vector<DailySeries> series;
  series.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.meta.kind == SeriesKind::index_monthly) {
      std::ifstream in(e.path);
      if (!in) throw InputError(e.path, 0, "cannot open file");
      series.push_back(expand_monthly(parse_monthly_csv(in, e.missing_sentinels, e.path), e.meta, days));
    } else {
      series.push_back(parse_daily_csv(e.path, e.meta, days, e.missing_sentinels));
    }
  }
  return build_panel(std::move(series));
}

void write_panel(const RawPanel& panel, const std::string& csv_path, const std::string& meta_path) {
  std::ostringstream csv;
  csv << "date";
  for (const auto& m : panel.metas()) csv << ',' << m.series_id;
  csv << '\n';
  for (DayIndex j = 1; j <= panel.days(); ++j) {
    csv << to_iso(j);
    for (int r = 0; r < panel.series_count(); ++r) {
      csv << ',';
      if (!panel.is_missing(r, j)) csv << format_double(panel.value(r, j));
    }
    csv << '\n';
  }
  json metas = json::array();
  for (const auto& m : panel.metas()) metas.push_back(meta_to_json(m));
  json doc{{"days", panel.days()}, {"series", metas}};
  write_file_atomic(csv_path, csv.str());
  write_file_atomic(meta_path, doc.dump(2) + "\n");
}

RawPanel read_panel(const std::string& csv_path, const std::string& meta_path) {
  json doc;
  try {
    doc = json::parse(read_file(meta_path));
  } catch (const json::exception& e) {
    throw InputError(meta_path, 0, std::string("invalid JSON: ") + e.what());
  }
  const int days = doc.at("days").get<int>();
  std::vector<SeriesMeta> metas;
  for (const auto& item : doc.at("series")) metas.push_back(meta_from_json(item, meta_path));
  const auto rows = metas.size();
  std::vector<double> values(rows * days, 0.0);
  std::vector<std::uint8_t> missing(rows * days, 1);

  std::ifstream in(csv_path);
  if (!in) throw InputError(csv_path, 0, "cannot open file");
  std::string line;
  int line_no = 0;
  if (!next_content_line(in, line, line_no)) throw InputError(csv_path, 1, "empty panel file");
  if (split_fields(line).size() != rows + 1) throw InputError(csv_path, 1, "header/meta mismatch");
  DayIndex j = 0;
  while (next_content_line(in, line, line_no)) {
    ++j;
    const auto fields = split_fields(line);
    if (fields.size() != rows + 1 || j > days) throw InputError(csv_path, line_no, "bad panel row");
    for (std::size_t r = 0; r < rows; ++r) {
      if (fields[r + 1].empty()) continue;
      const auto v = parse_double(fields[r + 1]);
      if (!v) throw InputError(csv_path, line_no, "malformed value");
      values[r * days + (j - 1)] = *v;
      missing[r * days + (j - 1)] = 0;
    }
  }
  if (j != days) throw InputError(csv_path, line_no, "panel has " + std::to_string(j) + " rows");
  return RawPanel(std::move(metas), days, std::move(values), std::move(missing));
}

}  // namespace analogwave
