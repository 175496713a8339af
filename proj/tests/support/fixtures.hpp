#pragma once

// Fixtures and independent reference implementations used by the unit and
// acceptance suites. Nothing here calls the prefix-sum paths it is used to check.

#include <optional>
#include <string>
#include <vector>

#include "analogwave/climatology.hpp"
#include "analogwave/ingest.hpp"
#include "analogwave/rule_miner.hpp"
#include "analogwave/scorer.hpp"

namespace analogwave::testing {

/// Days counted by walking month lengths from 1973-01-01; no library calls.
int brute_force_day_index(int year, int month, int day);

/// Direct k-loop over raw anomalies; nullopt if any day is missing or off-axis.
std::optional<double> naive_window_sum(const AnomalyMatrix& anoms, SeriesId i1, SeriesId i2, int l,
                                       int n, DayIndex j);

/// Quadruple loop over (pair, l, n, day) with naive summation.
std::vector<Rule> naive_mine(const AnomalyMatrix& anoms, const MiningTarget& target,
                             const SearchSpace& space, DayRange learning);

/// Randomized anomaly panel with planted precursors.
struct MinerFixture {
  AnomalyMatrix anoms;
  MiningTarget target;
  SearchSpace space;
  DayRange learning;
};

/// 6 series x 1500 days, L = 14..20, N = 1..10, ~1% missing cells, target
/// series 1 with heat extremes where its anomaly exceeds 2 plus 8 planted ones
/// preceded (l = 17) by spikes in series 2 and 3.
MinerFixture make_miner_fixture(unsigned seed = 20150713);

/// Daily station panel with a planted teleconnection: spikes in series A and B
/// exactly 30 days before target heat extremes in Jun-Aug.
struct PlantedFixture {
  RawPanel panel;
  SeriesId target = 1;
  SeriesId series_a = 2;
  SeriesId series_b = 3;
  YearRange baseline{1973, 1994};
  DayRange learning;
  DayRange validation;
  std::vector<DayIndex> planted_learning;
  std::vector<DayIndex> planted_validation;
  int lead = 30;
};

PlantedFixture make_planted_fixture(unsigned seed = 1973);

/// Writes the planted panel as per-series CSVs plus `manifest.json`; returns
/// the manifest path.
std::string write_planted_inputs(const PlantedFixture& fixture, const std::string& dir);

/// 39 Annaba heat rules with their recorded firing dates (day ranges expanded)
/// and the retained/excluded mark they were published with.
struct PublishedRule {
  int number = 0;
  bool published_retained = false;  // "+" in the table
  Rule rule;
};
std::vector<PublishedRule> published_annaba_rules();

/// 13 verified Annaba heat clusters from 2011-2014 with their observed days,
/// plus 22 heat-wave groups, 8 of which fall in an ExtremeHit window.
struct ScorerFixture {
  std::vector<Outcome> outcomes;
  std::vector<WaveGroup> waves;
};
ScorerFixture make_annaba_scorer_fixture();

DayIndex day(const char* iso);

}  // namespace analogwave::testing
