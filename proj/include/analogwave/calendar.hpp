#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace analogwave {

/// Ordinal day on the panel axis. Day 1 is 1973-01-01; the axis is open-ended.
using DayIndex = int;

inline constexpr int kEpochYear = 1973;

struct CivilDate {
  int year = kEpochYear;
  int month = 1;
  int day = 1;

  auto operator<=>(const CivilDate&) const = default;
};

/// Calendar position (month, day) shared by every year; (2, 29) is its own slot.
struct CalendarSlot {
  int month = 1;
  int day = 1;

  auto operator<=>(const CalendarSlot&) const = default;
};

inline constexpr int kSlotCount = 366;

/// Month thirds: 1 = days 1-10, 2 = days 11-20, 3 = day 21 to end of month.
struct Sector {
  int year = kEpochYear;
  int month = 1;
  int third = 1;

  auto operator<=>(const Sector&) const = default;
};

bool is_leap_year(int year);
int days_in_month(int year, int month);
bool is_valid_date(const CivilDate& date);

CivilDate index_to_date(DayIndex j);

/// Throws std::out_of_range for dates before 1973-01-01 and
/// std::invalid_argument for dates that do not exist.
DayIndex date_to_index(const CivilDate& date);

Sector third_of(const CivilDate& date);
inline Sector third_of(DayIndex j) { return third_of(index_to_date(j)); }

/// First and last day index covered by a sector.
std::pair<DayIndex, DayIndex> sector_days(const Sector& sector);
Sector next_sector(const Sector& sector);

CalendarSlot slot_of(const CivilDate& date);
/// Dense position 0..365 of a slot within a leap year.
int slot_position(const CalendarSlot& slot);
CalendarSlot slot_at(int position);

std::string to_iso(const CivilDate& date);
inline std::string to_iso(DayIndex j) { return to_iso(index_to_date(j)); }

/// Parses strict `YYYY-MM-DD`. Throws std::invalid_argument.
CivilDate parse_iso_date(std::string_view text);

}  // namespace analogwave
