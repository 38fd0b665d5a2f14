#include "branchscope/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include <openssl/evp.h>

#include "branchscope/error.hpp"

namespace branchscope {

namespace {

std::string_view trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto v = trim(value);
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("invalid value '" + value + "' for " + key);
  }
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  PipelineConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    config.set(std::string(trim(view.substr(0, eq))), std::string(trim(view.substr(eq + 1))));
  }
  return config;
}

void PipelineConfig::set(std::string key, const std::string& value) {
  std::replace(key.begin(), key.end(), '-', '_');
  auto v = std::string(trim(value));
  if (key == "input") input = v;
  else if (key == "out_dir") out_dir = v;
  else if (key == "region_map") region_map = v;
  else if (key == "stopwords") stopwords = v;
  else if (key == "threshold") threshold = parse_number<double>(key, v);
  else if (key == "threshold_mode") {
    if (v == "document") threshold_mode = FrequencyMode::Document;
    else if (v == "token") threshold_mode = FrequencyMode::Token;
    else throw ConfigError("threshold_mode must be 'document' or 'token'");
  }
  else if (key == "min_token_len") min_token_len = parse_number<std::size_t>(key, v);
  else if (key == "k_min") k_min = parse_number<int>(key, v);
  else if (key == "k_max") k_max = parse_number<int>(key, v);
  else if (key == "restarts") restarts = parse_number<int>(key, v);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, v);
  else if (key == "max_iter") max_iter = parse_number<int>(key, v);
  else if (key == "tol") tol = parse_number<double>(key, v);
  else if (key == "merge_k") {
    if (v.empty() || v == "auto") merge_k.reset();
    else merge_k = parse_number<int>(key, v);
  }
  else if (key == "stable_group") stable_group = v;
  else if (key == "top_quantile") top_quantile = parse_number<double>(key, v);
  else if (key == "top_n") top_n = parse_number<std::size_t>(key, v);
  else if (key == "zscore_mode") {
    if (v == "stddev") zscore_mode = ZScoreMode::StdDev;
    else if (v == "variance") zscore_mode = ZScoreMode::Variance;
    else throw ConfigError("zscore_mode must be 'stddev' or 'variance'");
  }
  else if (key == "r") r = parse_number<double>(key, v);
  else if (key == "root_mode") {
    if (v == "indicator") root_mode = RootMode::Indicator;
    else if (v == "skip") root_mode = RootMode::Skip;
    else throw ConfigError("root_mode must be 'indicator' or 'skip'");
  }
  else if (key == "sweep_steps") sweep_steps = parse_number<int>(key, v);
  else if (key == "min_share") min_share = parse_number<double>(key, v);
  else if (key == "trend_start") trend_start = parse_number<int>(key, v);
  else if (key == "trend_end") {
    if (v.empty()) trend_end.reset();
    else trend_end = parse_number<int>(key, v);
  }
  else throw ConfigError("unknown config key '" + key + "'");
}

void PipelineConfig::validate() const {
  if (input.empty()) throw ConfigError("input is required");
  if (out_dir.empty()) throw ConfigError("out_dir is required");
  std::vector<std::filesystem::path> paths{input, out_dir};
  if (!region_map.empty()) paths.push_back(region_map);
  if (!stopwords.empty()) paths.push_back(stopwords);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t j = i + 1; j < paths.size(); ++j) {
      if (paths[i].lexically_normal() == paths[j].lexically_normal()) {
        throw ConfigError("config paths must be distinct: " + paths[i].string());
      }
    }
  }
  if (threshold < 0.0 || threshold >= 1.0) throw ConfigError("threshold must lie in [0, 1)");
  if (min_token_len < 1) throw ConfigError("min_token_len must be at least 1");
  if (k_min < 2) throw ConfigError("k_min must be at least 2");
  if (k_min > k_max) throw ConfigError("k_min must not exceed k_max");
  if (restarts < 1) throw ConfigError("restarts must be positive");
  if (max_iter < 1) throw ConfigError("max_iter must be positive");
  if (!(tol >= 0.0)) throw ConfigError("tol must be nonnegative");
  if (merge_k && (*merge_k < k_min || *merge_k > k_max)) throw ConfigError("merge_k must lie in [k_min, k_max]");
  if (top_quantile < 0.0 || top_quantile > 1.0) throw ConfigError("top_quantile must lie in [0, 1]");
  if (r < 0.0 || r > 1.0) throw ConfigError("r must lie in [0, 1]");
  if (sweep_steps < 2) throw ConfigError("sweep_steps must be at least 2");
  if (min_share < 0.0 || min_share > 1.0) throw ConfigError("min_share must lie in [0, 1]");
  if (trend_end && *trend_end < trend_start) throw ConfigError("trend_end precedes trend_start");
}

// ---------------------------------------------------------------------------

TrendTable yearly_trend(std::span<const std::optional<int>> years, std::span<const Branch> branches, int start,
                        std::optional<int> end) {
  if (years.size() != branches.size()) throw std::invalid_argument("years and labels differ in length");
  std::map<int, std::pair<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < years.size(); ++i) {
    if (!years[i] || *years[i] < start || (end && *years[i] > *end)) continue;
    auto& c = counts[*years[i]];
    (branches[i] == Branch::T ? c.first : c.second)++;
  }
  TrendTable table;
  for (const auto& [year, c] : counts) {
    const double total = static_cast<double>(c.first + c.second);
    table.rows.push_back({year, Branch::T, c.first, static_cast<double>(c.first) / total});
    table.rows.push_back({year, Branch::A, c.second, static_cast<double>(c.second) / total});
  }
  return table;
}

csv::Table to_table(const TrendTable& trend) {
  csv::Table t{{"year", "branch", "count", "proportion"}, {}};
  for (const auto& r : trend.rows) {
    t.rows.push_back({std::to_string(r.year), std::string(to_string(r.branch)), std::to_string(r.count),
                      csv::format_real(r.proportion)});
  }
  return t;
}

// ---------------------------------------------------------------------------

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw StageError("manifest", "SHA-256 init failed");
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    char h[3];
    std::snprintf(h, sizeof h, "%02x", digest[i]);
    hex += h;
  }
  return hex;
}

std::vector<ManifestEntry> build_manifest(const std::filesystem::path& dir) {
  std::vector<ManifestEntry> entries;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto rel = std::filesystem::relative(e.path(), dir).generic_string();
    if (rel == "manifest.csv") continue;
    entries.push_back({rel, sha256_file(e.path()), e.file_size()});
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return entries;
}

}  // namespace branchscope
