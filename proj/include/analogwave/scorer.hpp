#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "analogwave/climatology.hpp"
#include "analogwave/predictor.hpp"

namespace analogwave {

enum class Classification { ExtremeHit, SameSign, Miss };

std::string to_string(Classification c);

/// Most extreme observed day in the days a cluster is judged on.
struct Observation {
  DayIndex best_day = 0;
  double value = 0.0;
  double baseline = 0.0;
  double sd = 0.0;
  DayIndex window_first = 0;  // evaluated days, inclusive
  DayIndex window_last = 0;

  double anomaly() const { return value - baseline; }
};

struct ScoreOptions {
  double multiplier = 2.0;
  /// Also judge a cluster on the following sector when its longest lead
  /// exceeds kAdjacentLeadDays.
  bool adjacent_sector_tolerance = false;
};

inline constexpr int kAdjacentLeadDays = 90;

struct Outcome {
  Sector sector;
  Direction direction = Direction::heat;
  std::vector<std::string> rule_keys;
  std::optional<Observation> observation;        // empty: unverifiable
  std::optional<Classification> classification;  // set iff observation is

  bool verifiable() const { return observation.has_value(); }
};

/// For heat the day with the largest anomaly, for cold the smallest; ties go to
/// the earliest day. nullopt when no day in the window has data.
std::optional<Observation> observe(const ForecastCluster& cluster, const RawPanel& panel,
                                   const Climatology& clim, SeriesId target,
                                   const ScoreOptions& options = {});

Classification classify(const Observation& obs, Direction direction, double multiplier = 2.0);

std::vector<Outcome> score_clusters(const std::vector<ForecastCluster>& clusters,
                                    const RawPanel& panel, const Climatology& clim,
                                    SeriesId target, const ScoreOptions& options = {});

struct ScoreCounts {
  int waves_total = 0;
  int waves_hit = 0;
  int clusters_total = 0;
  int clusters_verifiable = 0;
  int extreme_hit = 0;
  int same_sign = 0;
  int miss = 0;
};

struct ScoreReport {
  std::optional<double> recall_waves;        // waves hit / waves total
  std::optional<double> precision_clusters;  // ExtremeHit / verifiable clusters
  std::optional<double> sign_accuracy;       // (ExtremeHit + SameSign) / verifiable clusters
  ScoreCounts counts;
};

/// A wave group counts as hit when one of its days falls in the evaluated
/// window of an ExtremeHit outcome of the same direction.
ScoreReport report(const std::vector<Outcome>& outcomes, const std::vector<WaveGroup>& waves);

void write_outcomes_csv(std::ostream& out, const std::vector<Outcome>& outcomes);
std::string report_to_json(const ScoreReport& report);

}  // namespace analogwave
