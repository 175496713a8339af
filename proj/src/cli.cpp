#include "analogwave/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "analogwave/format.hpp"
#include "analogwave/kmz_export.hpp"
#include "analogwave/predictor.hpp"
#include "analogwave/rule_io.hpp"
#include "analogwave/scorer.hpp"
#include "analogwave/seasonal_filter.hpp"
#include "json.hpp"

namespace analogwave::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::vector<int> iota_range(int first, int last) {
  std::vector<int> v;
  for (int k = first; k <= last; ++k) v.push_back(k);
  return v;
}

// ---------------------------------------------------------------------------
// Config parsing

DayIndex parse_day_token(std::string_view token, const std::string& field) {
  token = trim(token);
  if (const auto v = parse_integer(token)) return static_cast<DayIndex>(*v);
  try {
    return date_to_index(parse_iso_date(token));
  } catch (const std::exception& e) {
    throw ConfigError(field, "expected a day index or YYYY-MM-DD, got '" + std::string(token) + "'");
  }
}

DayRange parse_day_range(std::string_view text, const std::string& field) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError(field, "expected FIRST:LAST");
  return {parse_day_token(text.substr(0, colon), field),
          parse_day_token(text.substr(colon + 1), field)};
}

YearRange parse_year_range(std::string_view text, const std::string& field) {
  const auto colon = text.find(':');
  const auto a = parse_integer(text.substr(0, colon));
  const auto b = colon == std::string_view::npos ? std::nullopt : parse_integer(text.substr(colon + 1));
  if (!a || !b) throw ConfigError(field, "expected FIRST_YEAR:LAST_YEAR");
  return {static_cast<int>(*a), static_cast<int>(*b)};
}

// "14:365", "1,2,5", or a mix such as "1:3,7".
std::vector<int> parse_int_list(std::string_view text, const std::string& field) {
  std::vector<int> out;
  for (auto item : split_fields(text)) {
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      const auto v = parse_integer(item);
      if (!v) throw ConfigError(field, "not an integer: '" + std::string(item) + "'");
      out.push_back(static_cast<int>(*v));
    } else {
      const auto a = parse_integer(item.substr(0, colon));
      const auto b = parse_integer(item.substr(colon + 1));
      if (!a || !b || *a > *b) throw ConfigError(field, "bad range '" + std::string(item) + "'");
      for (long long k = *a; k <= *b; ++k) out.push_back(static_cast<int>(k));
    }
  }
  return out;
}

std::vector<Direction> parse_directions(std::string_view text, const std::string& field) {
  std::vector<Direction> out;
  for (auto item : split_fields(text)) {
    try {
      out.push_back(parse_direction(std::string(item)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field, e.what());
    }
  }
  return out;
}

DayRange json_day_range(const json& j, const std::string& field) {
  if (j.is_string()) return parse_day_range(j.get<std::string>(), field);
  if (!j.is_array() || j.size() != 2) throw ConfigError(field, "expected [first, last]");
  auto token = [&](const json& v) {
    return v.is_number_integer() ? v.get<int>() : parse_day_token(v.get<std::string>(), field);
  };
  return {token(j[0]), token(j[1])};
}

std::vector<int> json_int_list(const json& j, const std::string& field) {
  if (j.is_string()) return parse_int_list(j.get<std::string>(), field);
  if (j.is_object()) return iota_range(j.at("min").get<int>(), j.at("max").get<int>());
  if (j.is_array()) return j.get<std::vector<int>>();
  throw ConfigError(field, "expected list, {min,max} or \"a:b\"");
}

// ---------------------------------------------------------------------------
// Workspace and receipts

struct Workspace {
  fs::path root;

  std::string path(const std::string& name) const { return (root / name).string(); }
  std::string panel_csv() const { return path("panel.csv"); }
  std::string panel_meta() const { return path("panel_meta.json"); }
  std::string climatology() const { return path("climatology.csv"); }
  std::string extremes() const { return path("extremes.csv"); }
  std::string waves() const { return path("waves.csv"); }
  std::string rules() const { return path("rules.jsonl"); }
  std::string shards() const { return path("shards"); }
  std::string retained() const { return path("rules_retained.jsonl"); }
  std::string excluded() const { return path("rules_excluded.jsonl"); }
  std::string exclusion_report() const { return path("exclusion_report.csv"); }
  std::string forecasts_raw() const { return path("forecasts_raw.csv"); }
  std::string forecasts() const { return path("forecasts.csv"); }
  std::string outcomes() const { return path("outcomes.csv"); }
  std::string score() const { return path("score.json"); }
  std::string kmz() const { return path("forecasts.kmz"); }
  std::string receipt(const std::string& stage) const { return path("receipts/" + stage + ".json"); }
};

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xf];
  }
  return out;
}

void require(const std::string& path) {
  if (!fs::exists(path)) throw MissingArtifact(path);
}

class Receipt {
 public:
  Receipt(std::string stage, const Workspace& ws, const RunConfig& config)
      : stage_(std::move(stage)), ws_(ws), config_(config), start_(std::chrono::steady_clock::now()) {}

  void input(const std::string& path) {
    require(path);
    inputs_.push_back(path);
  }
  void output(const std::string& path) { outputs_.push_back(path); }

  void write() const {
    ordered_json j;
    j["stage"] = stage_;
    j["inputs"] = hashes(inputs_);
    j["outputs"] = hashes(outputs_);
    j["config"] = json::parse(config_.to_json());
    j["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_file_atomic(ws_.receipt(stage_), j.dump(2) + "\n");
  }

 private:
  ordered_json hashes(const std::vector<std::string>& paths) const {
    ordered_json j = ordered_json::object();
    for (const auto& p : paths) {
      j[fs::relative(p, ws_.root).generic_string()] = sha256_hex(read_file(p));
    }
    return j;
  }

  std::string stage_;
  const Workspace& ws_;
  const RunConfig& config_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

template <typename Writer>
void write_text(const std::string& path, Writer&& writer) {
  std::ostringstream out;
  writer(out);
  write_file_atomic(path, out.str());
}

// ---------------------------------------------------------------------------
// Shared loading

struct Loaded {
  RawPanel panel;
  Climatology clim;
  AnomalyMatrix anoms;
};

Loaded load_panel_and_climatology(const Workspace& ws, Receipt& receipt, const RunConfig& config) {
  receipt.input(ws.panel_csv());
  receipt.input(ws.panel_meta());
  receipt.input(ws.climatology());
  Loaded l;
  l.panel = read_panel(ws.panel_csv(), ws.panel_meta());
  std::ifstream in(ws.climatology());
  l.clim = read_climatology_csv(in, ws.climatology());
  l.anoms = anomalize(l.panel, l.clim, config.workers);
  if (!l.panel.contains(config.target)) {
    throw ConfigError("target", "series " + std::to_string(config.target) + " is not in the panel");
  }
  return l;
}

std::string sector_label(const Sector& s) {
  static const char* names[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  static const char* thirds[] = {"beginning", "middle", "end"};
  return std::string("The ") + thirds[s.third - 1] + " of " + names[s.month - 1] + " " +
         std::to_string(s.year);
}

// ---------------------------------------------------------------------------
// Stages

void stage_ingest(const RunConfig& config, const Workspace& ws, std::ostream& log) {
  if (config.manifest_path.empty()) throw ConfigError("manifest", "required for ingest");
  Receipt receipt("ingest", ws, config);
  receipt.input(config.manifest_path);
  for (const auto& e : load_manifest(config.manifest_path)) receipt.input(e.path);
  const auto panel = load_panel_from_manifest(config.manifest_path, config.validation.last);
  write_panel(panel, ws.panel_csv(), ws.panel_meta());
  receipt.output(ws.panel_csv());
  receipt.output(ws.panel_meta());
  receipt.write();
  log << "ingest: " << panel.series_count() << " series x " << panel.days() << " days\n";
}

void stage_climatology(const RunConfig& config, const Workspace& ws, std::ostream& log) {
  Receipt receipt("climatology", ws, config);
  receipt.input(ws.panel_csv());
  receipt.input(ws.panel_meta());
  const auto panel = read_panel(ws.panel_csv(), ws.panel_meta());
  if (!panel.contains(config.target)) {
    throw ConfigError("target", "series " + std::to_string(config.target) + " is not in the panel");
  }
  const auto clim = compute_climatology(panel, config.baseline_years, config.workers);
  const auto anoms = anomalize(panel, clim, config.workers);
  const auto events = detect_extremes(anoms, clim, config.target, {1, panel.days()}, config.multiplier);

  write_text(ws.climatology(), [&](std::ostream& out) { write_climatology_csv(out, clim); });
  write_text(ws.extremes(), [&](std::ostream& out) {
    out << "series_id,date,direction,anomaly,sd\n";
    for (const auto& e : events) {
      out << e.target_series << ',' << to_iso(e.day) << ',' << to_string(e.direction) << ','
          << format_double(e.anomaly) << ',' << format_double(e.sd) << '\n';
    }
  });
  write_text(ws.waves(), [&](std::ostream& out) {
    out << "series_id,direction,first_date,last_date,days\n";
    for (Direction d : {Direction::heat, Direction::cold}) {
      std::vector<ExtremeEvent> subset;
      for (const auto& e : events) {
        if (e.direction == d) subset.push_back(e);
      }
      for (const auto& g : group_waves(subset)) {
        out << g.target_series << ',' << to_string(d) << ',' << to_iso(g.first_day) << ','
            << to_iso(g.last_day) << ',' << g.member_days.size() << '\n';
      }
    }
  });
  for (const auto& p : {ws.climatology(), ws.extremes(), ws.waves()}) receipt.output(p);
  receipt.write();
  log << "climatology: " << events.size() << " extremes for series " << config.target << "\n";
}

void stage_mine(const RunConfig& config, const Workspace& ws, std::ostream& log) {
  Receipt receipt("mine", ws, config);
  const auto l = load_panel_and_climatology(ws, receipt, config);

  SearchSpace space;
  space.series_ids = config.predictors;
  if (space.series_ids.empty()) {
    for (const auto& m : l.panel.metas()) space.series_ids.push_back(m.series_id);
  }
  for (SeriesId id : space.series_ids) {
    if (!l.panel.contains(id)) {
      throw ConfigError("predictors", "series " + std::to_string(id) + " is not in the panel");
    }
  }
  space.lead_times = config.lead_times;
  space.window_lengths = config.window_lengths;
  space.allow_diagonal = config.allow_diagonal;
  try {
    space.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("search_space", e.what());
  }
  const auto pairs = enumerate_pairs(space);
  const auto plan = plan_shards(pairs.size(), config.shards);
  const auto events =
      detect_extremes(l.anoms, l.clim, config.target, config.learning, config.multiplier);

  std::vector<Rule> rules;
  for (Direction d : config.directions) {
    MiningTarget target{config.target, d, extreme_days(events, d)};
    MineOptions options;
    options.workers = config.workers;
    options.checkpoint_dir = (fs::path(ws.shards()) / to_string(d)).string();
    options.fingerprint = sha256_hex(config.to_json() + read_file(ws.panel_csv()) +
                                     read_file(ws.climatology()) + to_string(d));
    auto mined = mine(l.anoms, target, space, config.learning, plan, options);
    log << "mine: " << to_string(d) << ": " << target.extreme_days.size() << " learning extremes, "
        << mined.size() << " rules from " << pairs.size() << " pairs\n";
    std::move(mined.begin(), mined.end(), std::back_inserter(rules));
  }
  std::sort(rules.begin(), rules.end(), rule_order);
  write_file_atomic(ws.rules(), rules_to_string(rules));
  receipt.output(ws.rules());
  receipt.write();
}

void stage_filter(const RunConfig& config, const Workspace& ws, std::ostream& log) {
  Receipt receipt("filter", ws, config);
  receipt.input(ws.rules());
  const auto result = filter_rules(read_rules_file(ws.rules()));
  write_file_atomic(ws.retained(), rules_to_string(result.retained));
  write_file_atomic(ws.excluded(), rules_to_string(result.excluded));
  write_text(ws.exclusion_report(),
             [&](std::ostream& out) { write_exclusion_report(out, result.report); });
  for (const auto& p : {ws.retained(), ws.excluded(), ws.exclusion_report()}) receipt.output(p);
  receipt.write();
  log << "filter: " << result.retained.size() << " retained, " << result.excluded.size()
      << " excluded\n";
}

void stage_predict(const RunConfig& config, const Workspace& ws, std::ostream& log) {
  Receipt receipt("predict", ws, config);
  const auto l = load_panel_and_climatology(ws, receipt, config);
  receipt.input(ws.retained());
  auto rules = read_rules_file(ws.retained());
  if (config.include_excluded_rules) {
    receipt.input(ws.excluded());
    auto extra = read_rules_file(ws.excluded());
    std::move(extra.begin(), extra.end(), std::back_inserter(rules));
  }
  const auto raw = scan(rules, l.anoms, config.validation, config.workers);
  const auto kept = filter_by_season(raw, rules);
  write_text(ws.forecasts_raw(), [&](std::ostream& out) { write_forecasts_csv(out, raw); });
  write_text(ws.forecasts(), [&](std::ostream& out) { write_forecasts_csv(out, kept); });
  receipt.output(ws.forecasts_raw());
  receipt.output(ws.forecasts());
  receipt.write();
  log << "predict: " << raw.size() << " candidate forecasts, " << kept.size()
      << " inside seasonal windows\n";
}

void stage_score(const RunConfig& config, const Workspace& ws, std::ostream& log) {
  Receipt receipt("score", ws, config);
  receipt.input(ws.forecasts());
  const auto l = load_panel_and_climatology(ws, receipt, config);
  std::vector<Forecast> forecasts;
  {
    std::ifstream in(ws.forecasts());
    forecasts = read_forecasts_csv(in, ws.forecasts());
  }
  ScoreOptions options;
  options.multiplier = config.multiplier;
  options.adjacent_sector_tolerance = config.adjacent_sector_tolerance;
  const auto outcomes = score_clusters(cluster(forecasts), l.panel, l.clim, config.target, options);

  const auto events =
      detect_extremes(l.anoms, l.clim, config.target, config.validation, config.multiplier);
  ordered_json summary = ordered_json::object();
  for (Direction d : config.directions) {
    std::vector<ExtremeEvent> subset;
    for (const auto& e : events) {
      if (e.direction == d) subset.push_back(e);
    }
    std::vector<Outcome> mine;
    for (const auto& o : outcomes) {
      if (o.direction == d) mine.push_back(o);
    }
    const auto rep = report(mine, group_waves(subset));
    summary[to_string(d)] = ordered_json::parse(report_to_json(rep));
    log << "score: " << to_string(d) << ": recall "
        << (rep.recall_waves ? format_percent(*rep.recall_waves) : "n/a") << "%, precision "
        << (rep.precision_clusters ? format_percent(*rep.precision_clusters) : "n/a")
        << "%, sign " << (rep.sign_accuracy ? format_percent(*rep.sign_accuracy) : "n/a") << "%\n";
  }
  write_text(ws.outcomes(), [&](std::ostream& out) { write_outcomes_csv(out, outcomes); });
  write_file_atomic(ws.score(), summary.dump(2) + "\n");
  receipt.output(ws.outcomes());
  receipt.output(ws.score());
  receipt.write();
}

std::string outcome_table(const std::string& outcomes_csv) {
  std::istringstream in(outcomes_csv);
  std::string line;
  std::getline(in, line);
  std::string html =
      "<table border=\"1\"><tr><th>Sector</th><th>Direction</th><th>Analysis</th>"
      "<th>Observed</th><th>Date</th><th>Baseline</th><th>SD</th><th>Rules</th></tr>";
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 11) continue;
    const Sector s{static_cast<int>(parse_integer(f[0]).value_or(0)),
                   static_cast<int>(parse_integer(f[1]).value_or(1)),
                   static_cast<int>(parse_integer(f[2]).value_or(1))};
    html += "<tr><td>" + xml_escape(sector_label(s)) + "</td><td>" + xml_escape(f[3]) + "</td><td>" +
            xml_escape(f[4]) + "</td><td>" + xml_escape(f[6]) + "</td><td>" + xml_escape(f[5]) +
            "</td><td>" + xml_escape(f[7]) + "</td><td>" + xml_escape(f[8]) + "</td><td>" +
            xml_escape(f[10]) + "</td></tr>";
  }
  return html + "</table>";
}

void stage_export_kmz(const RunConfig& config, const Workspace& ws, std::ostream& log) {
  Receipt receipt("export-kmz", ws, config);
  receipt.input(ws.panel_csv());
  receipt.input(ws.panel_meta());
  receipt.input(ws.retained());
  receipt.input(ws.outcomes());
  receipt.input(ws.score());
  const auto panel = read_panel(ws.panel_csv(), ws.panel_meta());
  if (!panel.contains(config.target)) {
    throw ConfigError("target", "series " + std::to_string(config.target) + " is not in the panel");
  }
  const auto& target = panel.meta(panel.row_of(config.target));
  if (!target.latitude || !target.longitude) {
    throw ConfigError("target", "series " + std::to_string(config.target) + " has no coordinates");
  }
  const auto score = json::parse(read_file(ws.score()));
  const auto rules = read_rules_file(ws.retained());

  std::string html = "<h3>" + xml_escape(target.name) + " (" + xml_escape(target.country) + ")</h3>";
  for (const auto& [direction, rep] : score.items()) {
    auto pct = [&](const char* key) {
      const auto& v = rep.at("percent").at(key);
      return v.is_null() ? std::string("n/a") : v.get<std::string>() + "%";
    };
    html += "<p>" + xml_escape(direction) + " waves: recall " + pct("recall_waves") +
            ", precision " + pct("precision_clusters") + ", sign accuracy " + pct("sign_accuracy") +
            "</p>";
  }
  html += outcome_table(read_file(ws.outcomes()));

  std::vector<Placemark> placemarks{
      {target.name, *target.latitude, *target.longitude, html}};
  std::map<SeriesId, std::vector<std::string>> sources;
  for (const auto& r : rules) {
    sources[r.i1].push_back(r.key());
    if (r.i2 != r.i1) sources[r.i2].push_back(r.key());
  }
  for (const auto& [id, keys] : sources) {
    if (!panel.contains(id) || id == config.target) continue;
    const auto& m = panel.meta(panel.row_of(id));
    if (!m.latitude || !m.longitude) continue;
    std::string desc = "<p>Predictor for " + xml_escape(target.name) + " in " +
                       std::to_string(keys.size()) + " retained rule(s):</p><ul>";
    for (const auto& k : keys) desc += "<li>" + xml_escape(k) + "</li>";
    placemarks.push_back({m.name, *m.latitude, *m.longitude, desc + "</ul>"});
  }

  const auto kmz = package_kmz(build_kml(placemarks));
  write_file_atomic(ws.kmz(), std::string_view(reinterpret_cast<const char*>(kmz.data()), kmz.size()));
  receipt.output(ws.kmz());
  receipt.write();
  log << "export-kmz: " << placemarks.size() << " placemarks -> " << ws.kmz() << "\n";
}

}  // namespace

RunConfig::RunConfig() : lead_times(iota_range(kMinLeadTime, kMaxLeadTime)),
                         window_lengths(iota_range(1, kMaxWindowLength)) {}

void RunConfig::validate() const {
  if (directions.empty()) throw ConfigError("directions", "at least one direction is required");
  if (baseline_years.first > baseline_years.last) throw ConfigError("baseline_years", "out of order");
  if (baseline_years.first < kEpochYear) throw ConfigError("baseline_years", "precedes 1973");
  if (learning.first < 1 || learning.first > learning.last) {
    throw ConfigError("learning_range", "must satisfy 1 <= first <= last");
  }
  if (validation.first > validation.last) throw ConfigError("validation_range", "out of order");
  if (learning.last >= validation.first) {
    throw ConfigError("validation_range", "must start after the learning range ends");
  }
  if (!(multiplier > 0.0)) throw ConfigError("multiplier", "must be > 0");
  if (shards < 1) throw ConfigError("shards", "must be >= 1");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  if (lead_times.empty()) throw ConfigError("lead_times", "empty");
  for (int l : lead_times) {
    if (l < kMinLeadTime || l > kMaxLeadTime) throw ConfigError("lead_times", "outside [14, 365]");
  }
  if (window_lengths.empty()) throw ConfigError("window_lengths", "empty");
  for (int n : window_lengths) {
    if (n < 1 || n > kMaxWindowLength) throw ConfigError("window_lengths", "outside [1, 365]");
  }
}

std::string RunConfig::to_json() const {
  ordered_json j;
  j["manifest"] = manifest_path;
  j["target"] = target;
  std::vector<std::string> dirs;
  for (Direction d : directions) dirs.push_back(to_string(d));
  j["directions"] = dirs;
  j["baseline_years"] = {baseline_years.first, baseline_years.last};
  j["learning_range"] = {to_iso(learning.first), to_iso(learning.last)};
  j["validation_range"] = {to_iso(validation.first), to_iso(validation.last)};
  j["lead_times"] = lead_times;
  j["window_lengths"] = window_lengths;
  j["predictors"] = predictors;
  j["shards"] = shards;
  j["multiplier"] = multiplier;
  j["allow_diagonal"] = allow_diagonal;
  j["adjacent_sector_tolerance"] = adjacent_sector_tolerance;
  j["include_excluded_rules"] = include_excluded_rules;
  return j.dump();
}

void apply_config_json(RunConfig& c, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "manifest") c.manifest_path = v.get<std::string>();
      else if (key == "workdir") c.workdir = v.get<std::string>();
      else if (key == "target") c.target = v.get<int>();
      else if (key == "directions") {
        c.directions.clear();
        for (const auto& d : v) c.directions.push_back(parse_direction(d.get<std::string>()));
      } else if (key == "baseline_years") {
        c.baseline_years = v.is_string() ? parse_year_range(v.get<std::string>(), key)
                                         : YearRange{v.at(0).get<int>(), v.at(1).get<int>()};
      } else if (key == "learning_range") c.learning = json_day_range(v, key);
      else if (key == "validation_range") c.validation = json_day_range(v, key);
      else if (key == "lead_times") c.lead_times = json_int_list(v, key);
      else if (key == "window_lengths") c.window_lengths = json_int_list(v, key);
      else if (key == "predictors") c.predictors = json_int_list(v, key);
      else if (key == "shards") c.shards = v.get<int>();
      else if (key == "workers") c.workers = v.get<unsigned>();
      else if (key == "multiplier") c.multiplier = v.get<double>();
      else if (key == "allow_diagonal") c.allow_diagonal = v.get<bool>();
      else if (key == "adjacent_sector_tolerance") c.adjacent_sector_tolerance = v.get<bool>();
      else if (key == "include_excluded_rules") c.include_excluded_rules = v.get<bool>();
      else throw ConfigError(key, "unknown config key");
    } catch (const json::exception& e) {
      throw ConfigError(key, e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  }
}

void run_stage(const std::string& stage, const RunConfig& config, std::ostream& log) {
  config.validate();
  const Workspace ws{fs::path(config.workdir)};
  fs::create_directories(ws.root);
  if (stage == "ingest") stage_ingest(config, ws, log);
  else if (stage == "climatology") stage_climatology(config, ws, log);
  else if (stage == "mine") stage_mine(config, ws, log);
  else if (stage == "filter") stage_filter(config, ws, log);
  else if (stage == "predict") stage_predict(config, ws, log);
  else if (stage == "score") stage_score(config, ws, log);
  else if (stage == "export-kmz") stage_export_kmz(config, ws, log);
  else if (stage == "all") {
    for (const char* s : {"ingest", "climatology", "mine", "filter", "predict", "score", "export-kmz"}) {
      run_stage(s, config, log);
    }
  } else {
    throw ConfigError("stage", "unknown stage '" + stage + "'");
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mine precursor rules for heat/cold waves, forecast, score and export KMZ"};
  app.name("analogwave");
  std::string stage, config_path, manifest, workdir, directions, baseline, learning, validation,
      leads, lengths, predictors;
  int target = 0, shards = 0;
  unsigned workers = 0;
  double multiplier = 0.0;
  bool diagonal = false, no_diagonal = false, adjacent = false, include_excluded = false;

  app.add_option("stage", stage, "Pipeline stage")->required()->check(CLI::IsMember(kStages));
  app.add_option("-c,--config", config_path, "JSON config file");
  app.add_option("--manifest", manifest, "Series manifest (JSON)");
  app.add_option("-w,--workdir", workdir, "Artifact directory");
  app.add_option("-t,--target", target, "Target series id");
  app.add_option("--directions", directions, "heat,cold");
  app.add_option("--baseline-years", baseline, "FIRST:LAST years");
  app.add_option("--learning", learning, "FIRST:LAST day index or date");
  app.add_option("--validation", validation, "FIRST:LAST day index or date");
  app.add_option("--lead-times", leads, "e.g. 14:365 or 14,30,60");
  app.add_option("--window-lengths", lengths, "e.g. 1:365");
  app.add_option("--predictors", predictors, "Candidate series ids, e.g. 1:131");
  app.add_option("--shards", shards, "Shard count");
  app.add_option("--workers", workers, "Worker threads (also ANALOGWAVE_WORKERS)");
  app.add_option("--multiplier", multiplier, "Extreme threshold in SDs");
  app.add_flag("--diagonal", diagonal, "Allow i1 == i2 pairs");
  app.add_flag("--no-diagonal", no_diagonal, "Forbid i1 == i2 pairs");
  app.add_flag("--adjacent-sector-tolerance", adjacent,
               "Judge long-lead clusters on the following sector too");
  app.add_flag("--include-excluded-rules", include_excluded,
               "Also predict with rules rejected by the seasonal filter");

  std::vector<const char*> argv{"analogwave"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) {
      if (!fs::exists(config_path)) throw ConfigError("config", "no such file " + config_path);
      apply_config_json(config, read_file(config_path));
    }
    if (const char* env = std::getenv("ANALOGWAVE_WORKERS")) {
      const auto v = parse_integer(env);
      if (!v || *v < 1) throw ConfigError("ANALOGWAVE_WORKERS", "must be a positive integer");
      config.workers = static_cast<unsigned>(*v);
    }
    if (!manifest.empty()) config.manifest_path = manifest;
    if (!workdir.empty()) config.workdir = workdir;
    if (app.count("--target")) config.target = target;
    if (!directions.empty()) config.directions = parse_directions(directions, "directions");
    if (!baseline.empty()) config.baseline_years = parse_year_range(baseline, "baseline_years");
    if (!learning.empty()) config.learning = parse_day_range(learning, "learning_range");
    if (!validation.empty()) config.validation = parse_day_range(validation, "validation_range");
    if (!leads.empty()) config.lead_times = parse_int_list(leads, "lead_times");
    if (!lengths.empty()) config.window_lengths = parse_int_list(lengths, "window_lengths");
    if (!predictors.empty()) config.predictors = parse_int_list(predictors, "predictors");
    if (app.count("--shards")) config.shards = shards;
    if (app.count("--workers")) config.workers = workers;
    if (app.count("--multiplier")) config.multiplier = multiplier;
    if (diagonal) config.allow_diagonal = true;
    if (no_diagonal) config.allow_diagonal = false;
    if (adjacent) config.adjacent_sector_tolerance = true;
    if (include_excluded) config.include_excluded_rules = true;
    run_stage(stage, config, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MissingArtifact& e) {
    err << "error: " << e.what() << " (run the stage that produces it first)\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace analogwave::cli
