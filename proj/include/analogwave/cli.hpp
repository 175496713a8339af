#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "analogwave/climatology.hpp"

namespace analogwave::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Invalid configuration; `field()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A stage input that an earlier stage should have produced.
class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(const std::string& path)
      : std::runtime_error("missing artifact " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct RunConfig {
  std::string manifest_path;
  std::string workdir = "analogwave-run";
  SeriesId target = 0;
  std::vector<Direction> directions{Direction::heat, Direction::cold};
  YearRange baseline_years{1973, 2013};
  DayRange learning{731, 13879};
  DayRange validation{13880, 15340};
  std::vector<int> lead_times;      // default 14..365
  std::vector<int> window_lengths;  // default 1..365
  std::vector<SeriesId> predictors;  // empty: every panel series
  int shards = 1;
  unsigned workers = 1;
  double multiplier = 2.0;
  bool allow_diagonal = true;
  bool adjacent_sector_tolerance = false;
  bool include_excluded_rules = false;

  RunConfig();

  /// Throws ConfigError naming the first bad field.
  void validate() const;
  std::string to_json() const;
};

/// Merges a JSON config document into `config`. Keys mirror RunConfig
/// (`manifest`, `workdir`, `target`, `directions`, `baseline_years`,
/// `learning_range`, `validation_range`, `lead_times`, `window_lengths`,
/// `predictors`, `shards`, `workers`, `multiplier`, `allow_diagonal`,
/// `adjacent_sector_tolerance`, `include_excluded_rules`).
void apply_config_json(RunConfig& config, const std::string& json_text);

inline const std::vector<std::string> kStages = {"ingest",  "climatology", "mine",       "filter",
                                                 "predict", "score",       "export-kmz", "all"};

/// Runs one stage (or `all`) and writes its artifacts plus a receipt under
/// `<workdir>/receipts/`.
void run_stage(const std::string& stage, const RunConfig& config, std::ostream& log);

/// Entry point shared by the tool and the tests. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace analogwave::cli
