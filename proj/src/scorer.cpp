#include "analogwave/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "analogwave/format.hpp"
#include "json.hpp"

namespace analogwave {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::ExtremeHit: return "ExtremeHit";
    case Classification::SameSign: return "SameSign";
    case Classification::Miss: return "Miss";
  }
  return "Miss";
}

std::optional<Observation> observe(const ForecastCluster& cluster, const RawPanel& panel,
                                   const Climatology& clim, SeriesId target,
                                   const ScoreOptions& options) {
  auto [first, last] = sector_days(cluster.sector);
  if (options.adjacent_sector_tolerance && cluster.max_lead() > kAdjacentLeadDays) {
    last = sector_days(next_sector(cluster.sector)).second;
  }
  const int prow = panel.row_of(target);
  const int crow = clim.row_of(target);
  std::optional<Observation> best;
  for (DayIndex j = first; j <= std::min(last, panel.days()); ++j) {
    if (panel.is_missing(prow, j)) continue;
    const auto& st = clim.for_day(crow, j);
    if (!st.defined()) continue;
    const double value = panel.value(prow, j);
    const double a = value - st.baseline;
    const bool better = !best || (cluster.direction == Direction::heat ? a > best->anomaly()
                                                                       : a < best->anomaly());
    if (better) best = Observation{j, value, st.baseline, st.sd, first, last};
  }
  return best;
}

Classification classify(const Observation& obs, Direction direction, double multiplier) {
  const double a = obs.anomaly();
  const bool same_sign = direction == Direction::heat ? a > 0 : a < 0;
  if (!same_sign) return Classification::Miss;
  if (std::abs(a) > multiplier * obs.sd) return Classification::ExtremeHit;
  return Classification::SameSign;
}

std::vector<Outcome> score_clusters(const std::vector<ForecastCluster>& clusters,
                                    const RawPanel& panel, const Climatology& clim,
                                    SeriesId target, const ScoreOptions& options) {
  std::vector<Outcome> outcomes;
  for (const auto& c : clusters) {
    Outcome o{c.sector, c.direction, c.rule_keys, observe(c, panel, clim, target, options), {}};
    if (o.observation) o.classification = classify(*o.observation, c.direction, options.multiplier);
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

ScoreReport report(const std::vector<Outcome>& outcomes, const std::vector<WaveGroup>& waves) {
  ScoreReport r;
  auto& c = r.counts;
  c.clusters_total = static_cast<int>(outcomes.size());
  for (const auto& o : outcomes) {
    if (!o.verifiable()) continue;
    ++c.clusters_verifiable;
    switch (*o.classification) {
      case Classification::ExtremeHit: ++c.extreme_hit; break;
      case Classification::SameSign: ++c.same_sign; break;
      case Classification::Miss: ++c.miss; break;
    }
  }
  c.waves_total = static_cast<int>(waves.size());
  for (const auto& w : waves) {
    const bool hit = std::any_of(outcomes.begin(), outcomes.end(), [&](const Outcome& o) {
      if (o.classification != Classification::ExtremeHit || o.direction != w.direction) return false;
      return std::any_of(w.member_days.begin(), w.member_days.end(), [&](DayIndex d) {
        return d >= o.observation->window_first && d <= o.observation->window_last;
      });
    });
    if (hit) ++c.waves_hit;
  }
  if (c.waves_total > 0) r.recall_waves = static_cast<double>(c.waves_hit) / c.waves_total;
  if (c.clusters_verifiable > 0) {
    r.precision_clusters = static_cast<double>(c.extreme_hit) / c.clusters_verifiable;
    r.sign_accuracy = static_cast<double>(c.extreme_hit + c.same_sign) / c.clusters_verifiable;
  }
  return r;
}

void write_outcomes_csv(std::ostream& out, const std::vector<Outcome>& outcomes) {
  out << "sector_year,sector_month,sector_third,direction,classification,best_date,"
         "observed_value,baseline,sd,observed_anomaly,rule_keys\n";
  for (const auto& o : outcomes) {
    out << o.sector.year << ',' << o.sector.month << ',' << o.sector.third << ','
        << to_string(o.direction) << ',';
    if (o.observation) {
      const auto& obs = *o.observation;
      out << to_string(*o.classification) << ',' << to_iso(obs.best_day) << ','
          << format_double(obs.value) << ',' << format_double(obs.baseline) << ','
          << format_double(obs.sd) << ',' << format_double(obs.anomaly());
    } else {
      out << "Unverifiable,,,,,";
    }
    out << ',';
    for (std::size_t k = 0; k < o.rule_keys.size(); ++k) out << (k ? ";" : "") << o.rule_keys[k];
    out << '\n';
  }
}

std::string report_to_json(const ScoreReport& r) {
  using nlohmann::ordered_json;
  auto fraction = [](const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  auto percent = [](const std::optional<double>& v) {
    return v ? ordered_json(format_percent(*v)) : ordered_json(nullptr);
  };
  ordered_json j;
  j["recall_waves"] = fraction(r.recall_waves);
  j["precision_clusters"] = fraction(r.precision_clusters);
  j["sign_accuracy"] = fraction(r.sign_accuracy);
  j["percent"] = {{"recall_waves", percent(r.recall_waves)},
                  {"precision_clusters", percent(r.precision_clusters)},
                  {"sign_accuracy", percent(r.sign_accuracy)}};
  j["counts"] = {{"waves_total", r.counts.waves_total},
                 {"waves_hit", r.counts.waves_hit},
                 {"clusters_total", r.counts.clusters_total},
                 {"clusters_verifiable", r.counts.clusters_verifiable},
                 {"extreme_hit", r.counts.extreme_hit},
                 {"same_sign", r.counts.same_sign},
                 {"miss", r.counts.miss}};
  return j.dump(2);
}

}  // namespace analogwave
