#include "analogwave/calendar.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace analogwave {

namespace {

namespace chr = std::chrono;

constexpr chr::sys_days kEpoch =
    chr::sys_days{chr::year{kEpochYear} / chr::January / 1};

constexpr int kCumulativeLeapYear[13] = {0,   31,  60,  91,  121, 152, 182,
                                         213, 244, 274, 305, 335, 366};

int parse_int(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

bool is_leap_year(int year) {
  return chr::year{year}.is_leap();
}

int days_in_month(int year, int month) {
  if (month < 1 || month > 12) {
    throw std::invalid_argument("month out of range: " + std::to_string(month));
  }
  auto last = chr::year_month_day_last{chr::year{year} / chr::month(month) / chr::last};
  return static_cast<int>(static_cast<unsigned>(last.day()));
}

bool is_valid_date(const CivilDate& date) {
  if (date.month < 1 || date.month > 12 || date.day < 1) return false;
  return chr::year_month_day{chr::year{date.year}, chr::month(date.month),
                             chr::day(date.day)}
      .ok();
}

CivilDate index_to_date(DayIndex j) {
  const chr::year_month_day ymd{kEpoch + chr::days{j - 1}};
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
          static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

DayIndex date_to_index(const CivilDate& date) {
  if (!is_valid_date(date)) {
    throw std::invalid_argument("invalid calendar date " + std::to_string(date.year) + "-" +
                                std::to_string(date.month) + "-" + std::to_string(date.day));
  }
  const chr::sys_days days{chr::year{date.year} / chr::month(date.month) / chr::day(date.day)};
  const auto offset = (days - kEpoch).count();
  if (offset < 0) {
    throw std::out_of_range("date " + to_iso(date) + " precedes 1973-01-01");
  }
  return static_cast<DayIndex>(offset + 1);
}

Sector third_of(const CivilDate& date) {
  const int third = date.day <= 10 ? 1 : (date.day <= 20 ? 2 : 3);
  return {date.year, date.month, third};
}

std::pair<DayIndex, DayIndex> sector_days(const Sector& sector) {
  const int first_day = 1 + 10 * (sector.third - 1);
  const int last_day = sector.third == 3 ? days_in_month(sector.year, sector.month)
                                         : 10 * sector.third;
  return {date_to_index({sector.year, sector.month, first_day}),
          date_to_index({sector.year, sector.month, last_day})};
}

Sector next_sector(const Sector& sector) {
  if (sector.third < 3) return {sector.year, sector.month, sector.third + 1};
  if (sector.month < 12) return {sector.year, sector.month + 1, 1};
  return {sector.year + 1, 1, 1};
}

CalendarSlot slot_of(const CivilDate& date) {
  return {date.month, date.day};
}

int slot_position(const CalendarSlot& slot) {
  return kCumulativeLeapYear[slot.month - 1] + slot.day - 1;
}

CalendarSlot slot_at(int position) {
  int month = 1;
  while (position >= kCumulativeLeapYear[month]) ++month;
  return {month, position - kCumulativeLeapYear[month - 1] + 1};
}

std::string to_iso(const CivilDate& date) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", date.year, date.month, date.day);
  return buf;
}

CivilDate parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  CivilDate date{parse_int(text.substr(0, 4)), parse_int(text.substr(5, 2)),
                 parse_int(text.substr(8, 2))};
  if (!is_valid_date(date)) {
    throw std::invalid_argument("no such date: '" + std::string(text) + "'");
  }
  return date;
}

}  // namespace analogwave
