#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "analogwave/rule_miner.hpp"

namespace analogwave {

inline constexpr int kMaxSeasonMonths = 4;

struct SeasonalDecision {
  bool retained = false;
  std::optional<SeasonalWindow> window;  // set when retained
  std::vector<int> firing_months;        // chronological, one per firing
  int best_count = 0;                    // most firings inside any 4-month window
};

/// Decision from a bag of firing months (1-12). Retained iff some circular
/// window of at most four months holds at least four firings; the window is
/// the shortest one reaching the best 4-month count, earliest start month first.
SeasonalDecision concentrated_months(std::span<const int> months);

/// Same decision on all of a rule's firings.
SeasonalDecision concentrated(const Rule& rule);

struct ExclusionEntry {
  std::string rule_key;
  SeasonalDecision decision;
};

struct FilterResult {
  std::vector<Rule> retained;  // input order, seasonal_window set
  std::vector<Rule> excluded;  // input order, seasonal_window empty
  std::vector<ExclusionEntry> report;  // one entry per input rule
};

FilterResult filter_rules(const std::vector<Rule>& rules);

/// `rule_key,decision,firing_months,window_start,window_len`; months are
/// `;`-separated, window cells empty for excluded rules.
void write_exclusion_report(std::ostream& out, const std::vector<ExclusionEntry>& report);

}  // namespace analogwave
