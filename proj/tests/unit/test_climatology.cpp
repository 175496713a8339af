#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "analogwave/climatology.hpp"
#include "fixtures.hpp"

using namespace analogwave;
using analogwave::testing::day;

namespace {

// Mean and sample SD of one calendar slot, gathered by walking the years.
std::pair<double, double> slot_oracle(const RawPanel& panel, int row, int month, int dom,
                                      YearRange years, int& count) {
  std::vector<double> xs;
  for (int y = years.first; y <= years.last; ++y) {
    if (!is_valid_date({y, month, dom})) continue;
    const DayIndex j = date_to_index({y, month, dom});
    if (j > panel.days() || panel.is_missing(row, j)) continue;
    xs.push_back(panel.value(row, j));
  }
  count = static_cast<int>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (xs.size() - 1))};
}

}  // namespace

TEST_CASE("slot statistics match a per-year walk") {
  auto f = testing::make_planted_fixture();
  auto clim = compute_climatology(f.panel, f.baseline, 2);
  for (int row = 0; row < f.panel.series_count(); ++row) {
    for (int pos = 0; pos < kSlotCount; pos += 7) {
      const auto slot = slot_at(pos);
      int count = 0;
      auto [mean, sd] = slot_oracle(f.panel, row, slot.month, slot.day, f.baseline, count);
      const auto& st = clim.at(row, pos);
      REQUIRE(st.count == count);
      CHECK(st.baseline == doctest::Approx(mean).epsilon(1e-12));
      CHECK(st.sd == doctest::Approx(sd).epsilon(1e-9));
    }
    int count = 0;
    auto [mean, sd] = slot_oracle(f.panel, row, 2, 29, f.baseline, count);
    CHECK(count == 5);  // 1976, 1980, 1984, 1988, 1992
    CHECK(clim.at(row, slot_position({2, 29})).baseline == doctest::Approx(mean));
    CHECK(clim.at(row, slot_position({2, 29})).sd == doctest::Approx(sd));
  }
}

TEST_CASE("baseline years restrict the sample") {
  auto f = testing::make_planted_fixture();
  auto clim = compute_climatology(f.panel, {1981, 1982});
  CHECK(clim.at(0, slot_position({7, 1})).count == 2);
  CHECK(clim.at(0, slot_position({2, 29})).count == 0);
  CHECK_FALSE(clim.at(0, slot_position({2, 29})).defined());
  // Feb 29 stays undefined, so anomalies on leap days are missing
  auto anoms = anomalize(f.panel, clim);
  CHECK(anoms.is_missing(0, day("1976-02-29")));
  CHECK_FALSE(anoms.is_missing(0, day("1976-03-01")));
}

TEST_CASE("single-sample slots are undefined") {
  auto f = testing::make_planted_fixture();
  auto clim = compute_climatology(f.panel, {1990, 1990});
  CHECK(clim.at(0, slot_position({5, 5})).count == 1);
  CHECK_FALSE(clim.at(0, slot_position({5, 5})).defined());
  auto anoms = anomalize(f.panel, clim);
  for (DayIndex j = 1; j <= anoms.days(); j += 13) CHECK(anoms.is_missing(0, j));
}

TEST_CASE("anomalies average to zero over the baseline") {
  auto f = testing::make_planted_fixture();
  auto clim = compute_climatology(f.panel, f.baseline);
  auto anoms = anomalize(f.panel, clim, 3);
  for (int row = 0; row < anoms.series_count(); ++row) {
    std::map<int, std::pair<double, int>> acc;
    for (DayIndex j = 1; j <= anoms.days(); ++j) {
      if (anoms.is_missing(row, j)) continue;
      auto& [s, n] = acc[slot_position(slot_of(index_to_date(j)))];
      s += anoms.anomaly(row, j);
      ++n;
    }
    for (const auto& [pos, sn] : acc) REQUIRE(std::abs(sn.first / sn.second) < 1e-9);
  }
}

TEST_CASE("prefix sums reproduce every window") {
  auto f = testing::make_miner_fixture();
  const auto& a = f.anoms;
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pick(1, a.days());
  for (int row = 0; row < a.series_count(); ++row) {
    const auto p = a.prefix_sums(row);
    const auto m = a.missing_counts(row);
    CHECK(p[0] == 0.0);
    CHECK(m[0] == 0);
    for (int t = 0; t < 200; ++t) {
      int s = pick(rng), e = pick(rng);
      if (s > e) std::swap(s, e);
      double naive = 0.0;
      int gaps = 0;
      for (DayIndex j = s; j <= e; ++j) {
        if (a.is_missing(row, j)) ++gaps;
        else naive += a.anomaly(row, j);
      }
      REQUIRE(m[e] - m[s - 1] == gaps);
      CHECK(p[e] - p[s - 1] == doctest::Approx(naive).epsilon(1e-10));
      auto w = a.window_total(row, s, e);
      CHECK(w.has_value() == (gaps == 0));
    }
  }
  CHECK_FALSE(a.window_total(0, 0, 5).has_value());
  CHECK_FALSE(a.window_total(0, 5, a.days() + 1).has_value());
}

TEST_CASE("extreme threshold is strict") {
  Climatology clim({1}, {1973, 1973});
  for (int pos = 0; pos < kSlotCount; ++pos) clim.at(0, pos) = SlotStats{0.0, 1.0, 10};
  auto anoms = AnomalyMatrix::from_values({1}, 4, {2.0, 2.0000001, -2.0, -2.5}, {0, 0, 0, 0});
  auto events = detect_extremes(anoms, clim, 1, {1, 4});
  REQUIRE(events.size() == 2);
  CHECK(events[0].day == 2);
  CHECK(events[0].direction == Direction::heat);
  CHECK(events[1].day == 4);
  CHECK(events[1].direction == Direction::cold);
  CHECK(extreme_days(events, Direction::cold) == std::vector<DayIndex>{4});
  CHECK(detect_extremes(anoms, clim, 1, {3, 3}).empty());
}

TEST_CASE("extreme sets shrink as the multiplier grows") {
  auto f = testing::make_planted_fixture();
  auto clim = compute_climatology(f.panel, f.baseline);
  auto anoms = anomalize(f.panel, clim);
  const DayRange all{1, anoms.days()};
  std::vector<DayIndex> prev;
  bool first = true;
  for (double m : {1.0, 1.5, 2.0, 2.5, 3.0, 4.0}) {
    auto ev = detect_extremes(anoms, clim, 1, all, m);
    std::vector<DayIndex> days;
    for (const auto& e : ev) days.push_back(e.day);
    if (!first) CHECK(std::includes(prev.begin(), prev.end(), days.begin(), days.end()));
    prev = days;
    first = false;
  }
  // the planted spikes are extreme at the default multiplier
  auto ev = detect_extremes(anoms, clim, 1, all);
  auto heat = extreme_days(ev, Direction::heat);
  for (DayIndex e : f.planted_learning)
    CHECK(std::binary_search(heat.begin(), heat.end(), e));
  for (DayIndex e : f.planted_validation)
    CHECK(std::binary_search(heat.begin(), heat.end(), e));
}

TEST_CASE("wave groups are maximal runs") {
  auto ev = [](DayIndex j) { return ExtremeEvent{1, j, Direction::heat, 5.0, 2.0}; };
  auto groups = group_waves({ev(10), ev(11), ev(12), ev(14), ev(20), ev(21), ev(30)});
  REQUIRE(groups.size() == 4);
  CHECK(groups[0].first_day == 10);
  CHECK(groups[0].last_day == 12);
  CHECK(groups[0].member_days.size() == 3);
  CHECK(groups[1].first_day == 14);
  CHECK(groups[2].last_day == 21);
  CHECK(groups[3].first_day == 30);
  CHECK(group_waves({}).empty());
  CHECK_THROWS_AS(group_waves({ev(1), ExtremeEvent{1, 2, Direction::cold, -5.0, 2.0}}),
                  std::invalid_argument);
}

TEST_CASE("climatology csv round trip") {
  auto f = testing::make_planted_fixture();
  auto clim = compute_climatology(f.panel, f.baseline);
  std::ostringstream out;
  write_climatology_csv(out, clim);
  std::istringstream in(out.str());
  auto back = read_climatology_csv(in);
  REQUIRE(back.series_ids() == clim.series_ids());
  for (int r = 0; r < static_cast<int>(clim.series_ids().size()); ++r)
    for (int pos = 0; pos < kSlotCount; ++pos) {
      REQUIRE(back.at(r, pos).count == clim.at(r, pos).count);
      REQUIRE(back.at(r, pos).baseline == clim.at(r, pos).baseline);
      REQUIRE(back.at(r, pos).sd == clim.at(r, pos).sd);
    }
}
