#include "analogwave/predictor.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>
#include <unordered_map>

#include "analogwave/format.hpp"
#include "analogwave/parallel.hpp"

namespace analogwave {

int ForecastCluster::max_lead() const {
  int lead = 0;
  for (const auto& f : members) lead = std::max(lead, f.lead());
  return lead;
}

std::vector<Forecast> scan(const std::vector<Rule>& rules, const AnomalyMatrix& anoms,
                           DayRange range, unsigned workers) {
  std::vector<std::vector<Forecast>> per_rule(rules.size());
  parallel_for(rules.size(), workers, [&](std::size_t k) {
    const Rule& rule = rules[k];
    const PairSignal signal(anoms, rule.i1, rule.i2);
    const std::string key = rule.key();
    const DayIndex first_issue = std::max(range.first - rule.l, rule.n);
    const DayIndex last_issue = std::min(range.last, anoms.days());
    for (DayIndex c = first_issue; c <= last_issue; ++c) {
      const auto s = signal.sum_ending(c, rule.n);
      if (!s) continue;
      Side side;
      if (*s > rule.max_thr) side = Side::above_max;
      else if (*s < rule.min_thr) side = Side::below_min;
      else continue;
      const DayIndex target = c + rule.l;
      per_rule[k].push_back({key, c, target, rule.direction, side, third_of(target),
                             target <= anoms.days()});
    }
  });
  std::vector<Forecast> out;
  for (auto& v : per_rule) std::move(v.begin(), v.end(), std::back_inserter(out));
  std::stable_sort(out.begin(), out.end(), [](const Forecast& a, const Forecast& b) {
    return std::tie(a.target_day, a.rule_key) < std::tie(b.target_day, b.rule_key);
  });
  return out;
}

std::vector<Forecast> filter_by_season(const std::vector<Forecast>& forecasts,
                                       const std::vector<Rule>& rules) {
  std::unordered_map<std::string, std::optional<SeasonalWindow>> windows;
  for (const auto& r : rules) windows[r.key()] = r.seasonal_window;
  std::vector<Forecast> kept;
  for (const auto& f : forecasts) {
    const auto it = windows.find(f.rule_key);
    if (it != windows.end() && it->second && !it->second->contains(f.sector.month)) continue;
    kept.push_back(f);
  }
  return kept;
}

std::vector<ForecastCluster> cluster(const std::vector<Forecast>& forecasts) {
  std::map<std::pair<Sector, Direction>, ForecastCluster> groups;
  for (const auto& f : forecasts) {
    auto& c = groups[{f.sector, f.direction}];
    c.sector = f.sector;
    c.direction = f.direction;
    c.members.push_back(f);
    c.rule_keys.push_back(f.rule_key);
  }
  std::vector<ForecastCluster> out;
  for (auto& [key, c] : groups) {
    std::sort(c.rule_keys.begin(), c.rule_keys.end());
    c.rule_keys.erase(std::unique(c.rule_keys.begin(), c.rule_keys.end()), c.rule_keys.end());
    out.push_back(std::move(c));
  }
  return out;
}

void write_forecasts_csv(std::ostream& out, const std::vector<Forecast>& forecasts) {
  out << "rule_key,issue_date,target_date,direction,side,sector_year,sector_month,sector_third,"
         "verifiable\n";
  for (const auto& f : forecasts) {
    out << f.rule_key << ',' << to_iso(f.issue_day) << ',' << to_iso(f.target_day) << ','
        << to_string(f.direction) << ',' << to_string(f.side) << ',' << f.sector.year << ','
        << f.sector.month << ',' << f.sector.third << ',' << (f.verifiable ? "true" : "false")
        << '\n';
  }
}

std::vector<Forecast> read_forecasts_csv(std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line) || trim(line).substr(0, 9) != "rule_key,") {
    throw InputError(source, 1, "expected forecast header");
  }
  std::vector<Forecast> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 9) throw InputError(source, line_no, "expected 9 fields");
    try {
      Forecast fc;
      fc.rule_key = std::string(f[0]);
      fc.issue_day = date_to_index(parse_iso_date(f[1]));
      fc.target_day = date_to_index(parse_iso_date(f[2]));
      fc.direction = parse_direction(std::string(f[3]));
      fc.side = parse_side(std::string(f[4]));
      fc.sector = third_of(fc.target_day);
      fc.verifiable = f[8] == "true";
      out.push_back(std::move(fc));
    } catch (const std::exception& e) {
      throw InputError(source, line_no, e.what());
    }
  }
  return out;
}

}  // namespace analogwave
