#include "analogwave/seasonal_filter.hpp"

#include <array>
#include <ostream>
#include <stdexcept>

namespace analogwave {

namespace {

int count_in(const std::array<int, 12>& counts, int start_month, int length) {
  int total = 0;
  for (int k = 0; k < length; ++k) total += counts[(start_month - 1 + k) % 12];
  return total;
}

}  // namespace

SeasonalDecision concentrated_months(std::span<const int> months) {
  SeasonalDecision d;
  std::array<int, 12> counts{};
  for (int m : months) {
    if (m < 1 || m > 12) throw std::invalid_argument("month out of range: " + std::to_string(m));
    ++counts[m - 1];
    d.firing_months.push_back(m);
  }
  for (int start = 1; start <= 12; ++start) {
    d.best_count = std::max(d.best_count, count_in(counts, start, kMaxSeasonMonths));
  }
  d.retained = d.best_count >= kQuorumSize;
  if (!d.retained) return d;
  for (int length = 1; length <= kMaxSeasonMonths && !d.window; ++length) {
    for (int start = 1; start <= 12; ++start) {
      if (count_in(counts, start, length) == d.best_count) {
        d.window = SeasonalWindow{start, length};
        break;
      }
    }
  }
  return d;
}

SeasonalDecision concentrated(const Rule& rule) {
  std::vector<int> months;
  months.reserve(rule.firings.size());
  for (const auto& f : rule.firings) months.push_back(index_to_date(f.day).month);
  return concentrated_months(months);
}

FilterResult filter_rules(const std::vector<Rule>& rules) {
  FilterResult result;
  for (const auto& rule : rules) {
    auto decision = concentrated(rule);
    Rule copy = rule;
    copy.seasonal_window = decision.window;
    (decision.retained ? result.retained : result.excluded).push_back(std::move(copy));
    result.report.push_back({rule.key(), std::move(decision)});
  }
  return result;
}

void write_exclusion_report(std::ostream& out, const std::vector<ExclusionEntry>& report) {
  out << "rule_key,decision,firing_months,window_start,window_len\n";
  for (const auto& e : report) {
    out << e.rule_key << ',' << (e.decision.retained ? "retained" : "excluded") << ',';
    for (std::size_t k = 0; k < e.decision.firing_months.size(); ++k) {
      if (k) out << ';';
      out << e.decision.firing_months[k];
    }
    out << ',';
    if (e.decision.window) {
      out << e.decision.window->start_month << ',' << e.decision.window->length_months;
    } else {
      out << ',';
    }
    out << '\n';
  }
}

}  // namespace analogwave
