#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "analogwave/calendar.hpp"
#include "analogwave/format.hpp"

namespace analogwave::testing {

namespace fs = std::filesystem;

DayIndex day(const char* iso) { return date_to_index(parse_iso_date(iso)); }

int brute_force_day_index(int year, int month, int dom) {
  static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  auto leap = [](int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; };
  int count = 0;
  for (int y = 1973; y < year; ++y) count += leap(y) ? 366 : 365;
  for (int m = 1; m < month; ++m) count += lengths[m - 1] + (m == 2 && leap(year) ? 1 : 0);
  return count + dom;
}

std::optional<double> naive_window_sum(const AnomalyMatrix& anoms, SeriesId i1, SeriesId i2, int l,
                                       int n, DayIndex j) {
  const int r1 = anoms.row_of(i1);
  const int r2 = anoms.row_of(i2);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const DayIndex d = j - l - k;
    if (d < 1 || d > anoms.days()) return std::nullopt;
    if (anoms.is_missing(r1, d) || anoms.is_missing(r2, d)) return std::nullopt;
    total += anoms.anomaly(r1, d) + anoms.anomaly(r2, d);
  }
  return total;
}

std::vector<Rule> naive_mine(const AnomalyMatrix& anoms, const MiningTarget& target,
                             const SearchSpace& space, DayRange learning) {
  std::vector<SeriesId> ids(space.series_ids);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::set<DayIndex> extremes;
  for (DayIndex e : target.extreme_days)
    if (learning.contains(e)) extremes.insert(e);

  std::vector<Rule> rules;
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = a; b < ids.size(); ++b) {
      if (a == b && !space.allow_diagonal) continue;
      for (int l : space.lead_times) {
        for (int n : space.window_lengths) {
          double hi = -std::numeric_limits<double>::infinity();
          double lo = std::numeric_limits<double>::infinity();
          bool any = false;
          for (DayIndex j = learning.first; j <= learning.last; ++j) {
            if (extremes.count(j)) continue;
            auto s = naive_window_sum(anoms, ids[a], ids[b], l, n, j);
            if (!s) continue;
            any = true;
            hi = std::max(hi, *s);
            lo = std::min(lo, *s);
          }
          if (!any) continue;
          std::vector<Firing> firings;
          for (DayIndex e : extremes) {
            auto s = naive_window_sum(anoms, ids[a], ids[b], l, n, e);
            if (!s) continue;
            if (*s > hi) firings.push_back({e, Side::above_max});
            else if (*s < lo) firings.push_back({e, Side::below_min});
          }
          std::vector<DayIndex> picked;
          for (const Firing& f : firings)
            if (picked.empty() || f.day - picked.back() > 30) picked.push_back(f.day);
          if (picked.size() < 4) continue;
          Rule r;
          r.target = target.series;
          r.direction = target.direction;
          r.i1 = ids[a];
          r.i2 = ids[b];
          r.n = n;
          r.l = l;
          r.min_thr = lo;
          r.max_thr = hi;
          r.firings = std::move(firings);
          r.quorum = std::move(picked);
          rules.push_back(std::move(r));
        }
      }
    }
  }
  std::sort(rules.begin(), rules.end(), [](const Rule& x, const Rule& y) {
    return std::tie(x.i1, x.i2, x.l, x.n) < std::tie(y.i1, y.i2, y.l, y.n);
  });
  return rules;
}

MinerFixture make_miner_fixture(unsigned seed) {
  constexpr int kSeries = 6;
  constexpr int kDays = 1500;
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<SeriesId> ids{1, 2, 3, 4, 5, 6};
  std::vector<double> values(kSeries * kDays);
  std::vector<std::uint8_t> missing(kSeries * kDays, 0);
  for (double& v : values) v = noise(rng);
  for (std::size_t c = 0; c < missing.size(); ++c)
    if (unit(rng) < 0.01) missing[c] = 1;

  auto cell = [&](int row, DayIndex j) { return static_cast<std::size_t>(row) * kDays + (j - 1); };
  std::vector<DayIndex> planted;
  for (int k = 0; k < 8; ++k) planted.push_back(100 + 170 * k);
  for (DayIndex e : planted) {
    values[cell(0, e)] = 4.0;
    missing[cell(0, e)] = 0;
    for (int row : {1, 2}) {
      values[cell(row, e - 17)] = 4.0;
      missing[cell(row, e - 17)] = 0;
    }
  }

  MinerFixture f;
  f.learning = DayRange{31, kDays};
  std::vector<DayIndex> extremes;
  for (DayIndex j = 1; j <= kDays; ++j)
    if (!missing[cell(0, j)] && values[cell(0, j)] > 2.0) extremes.push_back(j);
  f.anoms = AnomalyMatrix::from_values(ids, kDays, std::move(values), std::move(missing));
  f.target = MiningTarget{1, Direction::heat, extremes};
  f.space.series_ids = ids;
  for (int l = 14; l <= 20; ++l) f.space.lead_times.push_back(l);
  for (int n = 1; n <= 10; ++n) f.space.window_lengths.push_back(n);
  f.space.allow_diagonal = true;
  return f;
}

PlantedFixture make_planted_fixture(unsigned seed) {
  PlantedFixture f;
  const int days = day("1994-12-31");
  f.learning = DayRange{day("1975-01-01"), day("1990-12-31")};
  f.validation = DayRange{day("1991-01-01"), days};
  for (const char* d : {"1976-07-10", "1979-06-25", "1982-08-05", "1985-07-20", "1988-06-15",
                        "1990-08-12"})
    f.planted_learning.push_back(day(d));
  for (const char* d : {"1991-07-15", "1992-06-22", "1993-08-06", "1994-07-27"})
    f.planted_validation.push_back(day(d));

  auto station = [](SeriesId id, const char* name, const char* country, double lat, double lon) {
    SeriesMeta m;
    m.series_id = id;
    m.name = name;
    m.country = country;
    m.kind = SeriesKind::station_daily;
    m.latitude = lat;
    m.longitude = lon;
    m.units = "F";
    return m;
  };
  std::vector<SeriesMeta> metas{station(1, "Annaba", "Algeria", 36.83, 7.82),
                                station(2, "Madrid", "Spain", 40.41, -3.70),
                                station(3, "Paris", "France", 48.85, 2.35),
                                station(4, "London", "United Kingdom", 51.50, -0.12)};

  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int rows = static_cast<int>(metas.size());
  std::vector<double> values(static_cast<std::size_t>(rows) * days);
  std::vector<std::uint8_t> missing(values.size(), 0);
  const double means[] = {65.0, 55.0, 52.0, 50.0};
  const double amps[] = {15.0, 10.0, 9.0, 8.0};
  for (int r = 0; r < rows; ++r) {
    for (DayIndex j = 1; j <= days; ++j) {
      const double phase = 2.0 * std::numbers::pi * (j - 110) / 365.25;
      const std::size_t c = static_cast<std::size_t>(r) * days + (j - 1);
      values[c] = means[r] + amps[r] * std::sin(phase) + noise(rng);
      if (r == 3 && unit(rng) < 0.005) missing[c] = 1;
    }
  }
  auto at = [&](int r, DayIndex j) -> double& {
    return values[static_cast<std::size_t>(r) * days + (j - 1)];
  };
  auto plant = [&](DayIndex e) {
    at(0, e) += 12.0;
    at(1, e - f.lead) += 8.0;
    at(2, e - f.lead) += 8.0;
  };
  for (DayIndex e : f.planted_learning) plant(e);
  for (DayIndex e : f.planted_validation) plant(e);
  for (double& v : values) v = std::round(v * 10.0) / 10.0;

  f.panel = RawPanel(std::move(metas), days, std::move(values), std::move(missing));
  return f;
}

std::string write_planted_inputs(const PlantedFixture& fixture, const std::string& dir) {
  fs::create_directories(dir);
  nlohmann::json manifest = nlohmann::json::array();
  const RawPanel& p = fixture.panel;
  for (int r = 0; r < p.series_count(); ++r) {
    const SeriesMeta& m = p.meta(r);
    const std::string file = "series_" + std::to_string(m.series_id) + ".csv";
    std::ofstream out(fs::path(dir) / file);
    out << "date,value\n";
    bool sentinel = false;
    for (DayIndex j = 1; j <= p.days(); ++j) {
      if (p.is_missing(r, j)) {
        // alternate between a sentinel row and an omitted row
        if ((sentinel = !sentinel)) out << to_iso(j) << ",9999.9\n";
        continue;
      }
      out << to_iso(j) << ',' << format_double(p.value(r, j)) << '\n';
    }
    manifest.push_back({{"series_id", m.series_id},
                        {"name", m.name},
                        {"country", m.country},
                        {"kind", to_string(m.kind)},
                        {"lat", *m.latitude},
                        {"lon", *m.longitude},
                        {"units", m.units},
                        {"path", file}});
  }
  const std::string path = (fs::path(dir) / "manifest.json").string();
  std::ofstream(path) << manifest.dump(2) << '\n';
  return path;
}

namespace {

struct PublishedRow {
  int number;
  bool plus;
  std::vector<const char*> dates;
};

const std::vector<PublishedRow>& published_rows() {
  // Rule 19's last firing is recorded only as December 2009; the 25th stands in.
  static const std::vector<PublishedRow> rows = {
      {1, false, {"1987-08-24", "1996-04-21", "1997-05-11", "2009-12-29"}},
      {2, true, {"1976-09-27", "1997-05-11", "1998-05-25", "1998-06-02", "1999-05-30", "1999-05-31",
                 "1999-06-01"}},
      {3, false, {"1982-11-08", "1994-09-14", "2009-12-22", "2009-12-23", "2010-12-07"}},
      {4, true, {"1982-11-07", "1994-09-13", "2009-12-22", "2009-12-23", "2010-12-07"}},
      {5, true, {"1982-11-08", "1994-09-09", "2009-12-23", "2009-12-24", "2010-12-08"}},
      {6, true, {"1983-05-13", "1990-06-30", "1998-06-05", "2004-08-19"}},
      {7, false, {"1979-01-22", "1997-01-22", "1998-06-02", "2003-08-29"}},
      {8, false, {"1979-01-22", "1997-01-22", "1998-05-02", "2003-08-29"}},
      {9, false, {"1982-06-20", "1983-05-20", "1990-02-27", "1991-03-07"}},
      {10, false, {"1977-02-22", "1984-11-08", "1994-09-08", "2010-12-06"}},
      {11, true, {"1978-12-13", "1988-01-17", "2008-09-09", "2010-12-09"}},
      {12, true, {"1978-02-18", "1991-03-23", "1998-06-02", "2010-06-14"}},
      {13, false, {"1979-07-31", "1987-10-04", "1996-07-25", "1996-07-26", "2001-10-09",
                   "2001-10-10"}},
      {14, false, {"1979-07-31", "1987-10-04", "1996-07-25", "2001-10-09", "2001-10-10"}},
      {15, false, {"1977-04-05", "1987-04-03", "1989-11-03", "1994-08-14"}},
      {16, false, {"1977-02-22", "1983-07-24", "1983-07-25", "1984-06-02", "1996-07-26"}},
      {17, true, {"1988-08-03", "1994-05-29", "1994-05-30", "1998-07-01", "2003-06-23"}},
      {18, true, {"1985-12-28", "1988-01-17", "2003-10-01", "2009-12-24"}},
      {19, true, {"1985-12-29", "1988-01-18", "2003-10-02", "2009-12-25"}},
      {20, true, {"1985-12-29", "1988-01-17", "1988-01-18", "2003-10-01", "2009-12-23",
                  "2009-12-24"}},
      {21, true, {"1985-12-29", "1988-01-17", "2003-10-01", "2009-12-22", "2009-12-23"}},
      {22, true, {"1985-12-29", "1988-01-17", "2003-10-02", "2009-12-22", "2009-12-23",
                  "2009-12-24"}},
      {23, true, {"1985-12-28", "1985-12-29", "1988-01-17", "1988-01-18", "2003-10-01",
                  "2003-10-02", "2009-12-22", "2009-12-23"}},
      {24, true, {"1979-02-06", "1988-01-17", "1988-01-18", "1996-12-23", "2001-01-06"}},
      {25, false, {"1983-07-26", "1983-07-27", "1983-09-10", "1989-07-11", "2004-08-19"}},
      {26, true, {"1978-08-03", "1989-06-23", "1997-08-08", "2003-08-24"}},
      {27, true, {"1987-08-31", "1990-10-12", "2000-12-08", "2007-08-30"}},
      {28, true, {"1978-02-26", "1982-01-13", "1982-01-14", "1982-01-15", "1996-03-26",
                  "2009-12-29"}},
      {29, false, {"1977-02-22", "1994-08-17", "1994-08-23", "1995-05-08", "1995-08-11"}},
      {30, false, {"1979-01-22", "1997-01-22", "1998-06-02", "2003-08-29"}},
      {31, false, {"1981-12-12", "1984-05-06", "1998-01-04", "2010-12-08", "2010-12-09"}},
      {32, true, {"1982-07-23", "1997-01-20", "1999-09-06", "2006-06-20", "2006-06-21"}},
      {33, false, {"1987-10-25", "1997-01-20", "1998-07-01", "2006-06-19"}},
      {34, true, {"1975-01-16", "1985-11-07", "1988-10-17", "2004-12-04"}},
      {35, true, {"1977-12-07", "1978-12-27", "1985-11-07", "2009-01-24"}},
      {36, true, {"1982-09-05", "1983-07-30", "1994-09-14", "1998-09-02"}},
      {37, true, {"1983-05-13", "1983-05-14", "1986-05-21", "1989-04-25", "1998-06-28",
                  "1998-06-30", "1998-07-01"}},
      {38, true, {"1983-05-13", "1983-05-14", "1986-05-21", "1989-04-25", "1998-06-29",
                  "1998-06-30", "1998-07-01"}},
      {39, false, {"1983-03-15", "1999-03-14", "2001-03-05", "2010-12-08", "2010-12-09"}},
  };
  return rows;
}

}  // namespace

std::vector<PublishedRule> published_annaba_rules() {
  std::vector<PublishedRule> out;
  for (const PublishedRow& row : published_rows()) {
    PublishedRule p;
    p.number = row.number;
    p.published_retained = row.plus;
    p.rule.target = 1;
    p.rule.direction = Direction::heat;
    p.rule.i1 = 100 + row.number;
    p.rule.i2 = 100 + row.number;
    p.rule.n = 1;
    p.rule.l = kMinLeadTime;
    for (const char* d : row.dates) p.rule.firings.push_back({day(d), Side::above_max});
    if (auto q = qualify(p.rule.firings)) p.rule.quorum = *q;
    out.push_back(std::move(p));
  }
  return out;
}

ScorerFixture make_annaba_scorer_fixture() {
  struct Row {
    Sector label;
    const char* best;
    double value, baseline, sd;
    const char* window_first;
    const char* window_last;
  };
  // Windows are the sector of the observed day; the September 2014 cluster has
  // a lead above 90 days and is judged on two sectors.
  const std::vector<Row> rows = {
      {{2011, 2, 3}, "2011-02-24", 55.1, 53.1, 4.0, "2011-02-21", "2011-02-28"},
      {{2011, 3, 2}, "2011-03-15", 68.6, 54.9, 4.7, "2011-03-11", "2011-03-20"},
      {{2011, 6, 2}, "2011-06-18", 82.0, 72.2, 3.7, "2011-06-11", "2011-06-20"},
      {{2011, 7, 2}, "2011-07-12", 86.8, 76.6, 3.3, "2011-07-11", "2011-07-20"},
      {{2011, 10, 3}, "2011-10-24", 70.2, 66.3, 4.3, "2011-10-21", "2011-10-31"},
      {{2012, 1, 2}, "2012-01-11", 52.3, 52.0, 3.7, "2012-01-11", "2012-01-20"},
      {{2012, 12, 1}, "2012-12-04", 55.7, 54.8, 3.6, "2012-12-01", "2012-12-10"},
      {{2013, 11, 1}, "2013-11-06", 72.1, 61.6, 4.7, "2013-11-01", "2013-11-10"},
      {{2013, 12, 2}, "2013-12-20", 54.7, 53.1, 3.6, "2013-12-11", "2013-12-20"},
      {{2014, 1, 3}, "2014-01-19", 58.9, 51.6, 3.1, "2014-01-11", "2014-01-20"},
      {{2014, 7, 2}, "2014-07-20", 83.8, 76.8, 2.7, "2014-07-11", "2014-07-20"},
      {{2014, 9, 1}, "2014-09-20", 84.3, 73.8, 3.3, "2014-09-01", "2014-09-20"},
      {{2014, 11, 2}, "2014-11-30", 73.9, 55.6, 5.0, "2014-11-21", "2014-11-30"},
  };
  ScorerFixture f;
  for (const Row& r : rows) {
    Outcome o;
    o.sector = r.label;
    o.direction = Direction::heat;
    o.rule_keys = {"1:heat:" + std::to_string(r.label.year) + ":" + std::to_string(r.label.month)};
    Observation obs;
    obs.best_day = day(r.best);
    obs.value = r.value;
    obs.baseline = r.baseline;
    obs.sd = r.sd;
    obs.window_first = day(r.window_first);
    obs.window_last = day(r.window_last);
    o.observation = obs;
    o.classification = classify(obs, Direction::heat, 2.0);
    f.outcomes.push_back(std::move(o));
  }

  const std::vector<std::pair<const char*, const char*>> groups = {
      // inside ExtremeHit windows
      {"2011-03-15", "2011-03-15"},
      {"2011-06-18", "2011-06-18"},
      {"2011-07-11", "2011-07-13"},
      {"2013-11-06", "2013-11-06"},
      {"2014-01-19", "2014-01-19"},
      {"2014-07-19", "2014-07-20"},
      {"2014-09-19", "2014-09-20"},
      {"2014-11-23", "2014-12-01"},
      // elsewhere
      {"2011-04-05", "2011-04-05"},
      {"2011-05-02", "2011-05-03"},
      {"2011-08-25", "2011-08-25"},
      {"2011-10-03", "2011-10-03"},
      {"2012-03-28", "2012-03-28"},
      {"2012-05-15", "2012-05-16"},
      {"2012-06-25", "2012-06-25"},
      {"2012-07-02", "2012-07-04"},
      {"2012-08-14", "2012-08-14"},
      {"2013-04-20", "2013-04-20"},
      {"2013-06-08", "2013-06-08"},
      {"2013-08-29", "2013-08-30"},
      {"2014-03-05", "2014-03-05"},
      {"2014-05-30", "2014-05-30"},
  };
  for (const auto& [a, b] : groups) {
    WaveGroup g;
    g.target_series = 1;
    g.direction = Direction::heat;
    g.first_day = day(a);
    g.last_day = day(b);
    for (DayIndex j = g.first_day; j <= g.last_day; ++j) g.member_days.push_back(j);
    f.waves.push_back(std::move(g));
  }
  return f;
}

}  // namespace analogwave::testing
