#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "analogwave/rule_miner.hpp"

namespace analogwave {

struct Forecast {
  std::string rule_key;
  DayIndex issue_day = 0;   // last day of the precursor window
  DayIndex target_day = 0;  // issue_day + l
  Direction direction = Direction::heat;
  Side side = Side::above_max;
  Sector sector;
  bool verifiable = true;  // false when target_day lies past the panel end

  int lead() const { return target_day - issue_day; }
  bool operator==(const Forecast&) const = default;
};

struct ForecastCluster {
  Sector sector;
  Direction direction = Direction::heat;
  std::vector<Forecast> members;
  std::vector<std::string> rule_keys;  // sorted, unique

  int max_lead() const;
};

/// Applies each rule on every issue day c with c <= range.last and
/// c + l >= range.first. A forecast is emitted when the window sum ending at c
/// lies strictly outside [min, max]. Reads no anomaly after c.
std::vector<Forecast> scan(const std::vector<Rule>& rules, const AnomalyMatrix& anoms,
                           DayRange range, unsigned workers = 1);

/// Keeps forecasts whose target month lies in their rule's seasonal window.
/// Forecasts of rules without a window pass through.
std::vector<Forecast> filter_by_season(const std::vector<Forecast>& forecasts,
                                       const std::vector<Rule>& rules);

/// Groups by (sector, direction), ordered by sector then direction.
std::vector<ForecastCluster> cluster(const std::vector<Forecast>& forecasts);

/// `rule_key,issue_date,target_date,direction,side,sector_year,sector_month,sector_third,verifiable`
void write_forecasts_csv(std::ostream& out, const std::vector<Forecast>& forecasts);
std::vector<Forecast> read_forecasts_csv(std::istream& in, const std::string& source = "<stream>");

}  // namespace analogwave
