#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "branchscope/coclus.hpp"
#include "branchscope/csv.hpp"
#include "branchscope/dependency.hpp"
#include "branchscope/keywords.hpp"
#include "branchscope/textprep.hpp"

namespace branchscope {

/// Every knob of a full pipeline run. Read from a flat `key = value` file;
/// each key can be overridden individually (see set()).
struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path out_dir;
  std::filesystem::path region_map;  // empty: bundled table
  std::filesystem::path stopwords;   // empty: bundled list

  double threshold = 0.0001;
  FrequencyMode threshold_mode = FrequencyMode::Document;
  std::size_t min_token_len = 2;

  int k_min = 2;
  int k_max = 9;
  int restarts = 10;
  std::uint64_t seed = 0;
  int max_iter = 100;
  double tol = 1e-9;
  std::optional<int> merge_k;  // empty: the k with the highest Q
  // Group id within the merge_k partition, or "word:<w>" for the group whose
  // word cluster contains w. Empty: ask through the prompt callback.
  std::string stable_group;

  double top_quantile = 0.02;
  std::size_t top_n = 25;
  ZScoreMode zscore_mode = ZScoreMode::StdDev;

  double r = 0.5;
  RootMode root_mode = RootMode::Indicator;
  int sweep_steps = 11;

  double min_share = 0.02;
  int trend_start = 2004;
  std::optional<int> trend_end;

  static PipelineConfig from_file(const std::filesystem::path& path);
  // Accepts keys with '-' or '_'. Throws ConfigError for unknown keys or bad values.
  void set(std::string key, const std::string& value);
  // Throws ConfigError.
  void validate() const;
};

struct TrendRow {
  int year = 0;
  Branch branch = Branch::T;
  std::size_t count = 0;
  double proportion = 0.0;
};

struct TrendTable {
  std::vector<TrendRow> rows;  // per year: T row then A row
};

// Paper-count share of each branch per year in [start, end]. Years without
// papers are omitted.
TrendTable yearly_trend(std::span<const std::optional<int>> years, std::span<const Branch> branches, int start = 2004,
                        std::optional<int> end = std::nullopt);
csv::Table to_table(const TrendTable& trend);

struct ChartSpec {
  enum class Kind { Line, Bar };
  Kind kind = Kind::Line;
  std::string title;
  std::string x_column;
  std::string y_column;
  std::string series_column;  // empty: single series
  std::string x_label;
  std::string y_label;
  std::optional<double> y_min;
  std::optional<double> y_max;
};

/// Static SVG chart of one table. Line charts treat x as numeric and break a
/// series wherever its y cell is empty or an x value present elsewhere in the
/// table is missing for it. Bar charts treat x as categorical. Unknown columns
/// throw ConfigError.
std::string render_chart(const csv::Table& table, const ChartSpec& spec);
void emit_chart(const std::filesystem::path& path, const csv::Table& table, const ChartSpec& spec);

struct ManifestEntry {
  std::string path;  // relative to the artifact directory, '/' separated
  std::string sha256;
  std::uintmax_t bytes = 0;
};

std::string sha256_file(const std::filesystem::path& path);
std::vector<ManifestEntry> build_manifest(const std::filesystem::path& dir);

struct PipelineResult {
  std::filesystem::path out_dir;
  std::vector<ManifestEntry> manifest;
  std::vector<std::string> warnings;
  int merge_k = 0;
  int stable_group = 0;
};

// Called when the config leaves stable_group empty. Receives the scan and the
// chosen k and returns a group id.
using StableGroupPrompt = std::function<int(const std::vector<ScanEntry>& scan, int merge_k,
                                            const std::vector<std::string>& vocabulary)>;

/// Runs ingest, text preparation, the k scan, merge, keywords, credit,
/// dependency and the report tables, writing every artifact under
/// config.out_dir together with `manifest.csv`.
///
/// Outputs are staged in a sibling directory and moved into place only on
/// success; a `<out_dir>.lock` file guards against concurrent runs. Stage
/// failures surface as StageError (or DataError for bad input) naming the stage.
PipelineResult run_pipeline(const PipelineConfig& config, const StableGroupPrompt& prompt = {});

}  // namespace branchscope
