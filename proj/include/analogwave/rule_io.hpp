#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "analogwave/rule_miner.hpp"

namespace analogwave {

/// One JSON object per line: target, direction, i1, i2, n, l, min, max,
/// firings [{date, side}], quorum [date], seasonal_window (null or
/// {start_month, length_months}).
std::string rule_to_json_line(const Rule& rule);
Rule rule_from_json_line(const std::string& line);

void write_rules(std::ostream& out, const std::vector<Rule>& rules);
std::vector<Rule> read_rules(std::istream& in, const std::string& source = "<stream>");

std::string rules_to_string(const std::vector<Rule>& rules);
std::vector<Rule> read_rules_file(const std::string& path);

}  // namespace analogwave
