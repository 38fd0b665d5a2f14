#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace branchscope {

inline constexpr std::string_view kUnknownRegion = "UNKNOWN";

struct Affiliation {
  std::string raw;
  std::string region;  // known region code or kUnknownRegion

  bool operator==(const Affiliation&) const = default;
};

struct Author {
  std::string name;
  std::vector<Affiliation> affiliations;

  bool operator==(const Author&) const = default;
};

struct Record {
  std::string id;
  std::optional<std::string> doi;
  std::string title;
  std::string abstract;
  std::optional<int> year;
  std::string doc_type;
  std::vector<Author> authors;
  std::vector<std::string> references;

  bool operator==(const Record&) const = default;
};

/// Maps free-text affiliation strings to region codes.
///
/// Patterns are matched case-insensitively as whole words (bounded by
/// non-alphanumeric characters) anywhere in the affiliation string. When several
/// patterns match, the longest one wins; equal lengths fall back to the pattern
/// that sorts first.
class RegionMap {
 public:
  RegionMap() = default;
  explicit RegionMap(std::vector<std::pair<std::string, std::string>> pattern_to_code);

  // Table bundled with the library (country names and common variants).
  static RegionMap bundled();
  // CSV with header `pattern,code`.
  static RegionMap from_csv(const std::filesystem::path& path);

  std::string lookup(std::string_view raw) const;
  bool is_known(std::string_view code) const;

 private:
  std::vector<std::pair<std::string, std::string>> patterns_;  // lowercase pattern, code
  std::vector<std::string> codes_;                              // sorted, unique
};

struct LineError {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<Record> records;
  std::vector<LineError> errors;
};

enum class InputFormat {
  JsonLines,
};

// Converts one raw input line into a JSON-lines record before parsing. Lets other
// export formats reuse the record parser; an empty result skips the line.
using LineConverter = std::function<std::optional<std::string>(std::string_view)>;

struct ParseOptions {
  InputFormat format = InputFormat::JsonLines;
  const RegionMap* regions = nullptr;  // nullptr: bundled map
  // Keep `region` fields verbatim (used when re-reading corpus snapshots).
  bool trust_regions = false;
  LineConverter converter;
};

// One record per non-blank line. Malformed lines are collected in
// ParseResult::errors; a repeated id throws DataError naming it.
ParseResult parse_records(std::istream& in, const ParseOptions& options = {});

enum class ExclusionReason {
  DocType,
  MissingDoi,
  MissingYear,
  YearOutOfRange,
};

std::string_view to_string(ExclusionReason reason);

struct FilterReport {
  std::map<ExclusionReason, std::size_t> excluded;
  std::size_t retained = 0;

  std::size_t total_excluded() const;
};

struct FilterOptions {
  int min_year = 1900;
  int max_year = 0;  // 0: current calendar year
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Record> documents);

  const std::vector<Record>& documents() const noexcept { return documents_; }
  std::size_t size() const noexcept { return documents_.size(); }
  const Record& operator[](std::size_t i) const { return documents_[i]; }

  std::optional<std::size_t> find(std::string_view id) const;

 private:
  std::vector<Record> documents_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct FilteredCorpus {
  Corpus corpus;
  FilterReport report;
};

// Keeps research articles (doc_type "Article", case-insensitive) that carry a
// DOI and a publication year within bounds. Throws DataError if nothing is left.
FilteredCorpus filter_corpus(std::vector<Record> records, const FilterOptions& options = {});

std::string normalize_doi(std::string_view doi);

struct CitationStats {
  std::size_t references = 0;  // all reference strings seen
  std::size_t resolved = 0;    // resolved to a corpus member, before deduplication
  std::size_t external = 0;
  std::size_t duplicates = 0;
  std::size_t self = 0;
};

/// Directed citation graph over corpus positions. `references(i)` lists the
/// documents cited by document i, sorted and without duplicates or self-loops.
class CitationGraph {
 public:
  CitationGraph() = default;
  CitationGraph(std::vector<std::vector<std::uint32_t>> references, CitationStats stats = {});

  std::size_t node_count() const noexcept { return refs_.size(); }
  std::size_t edge_count() const noexcept { return edges_; }
  const std::vector<std::uint32_t>& references(std::size_t node) const { return refs_[node]; }
  const std::vector<std::vector<std::uint32_t>>& adjacency() const noexcept { return refs_; }
  const CitationStats& stats() const noexcept { return stats_; }

 private:
  std::vector<std::vector<std::uint32_t>> refs_;
  std::size_t edges_ = 0;
  CitationStats stats_;
};

// References resolve by id first, then by normalized DOI.
CitationGraph build_citation_graph(const Corpus& corpus);

// Snapshot and report serialization. Records are written in the input schema,
// one JSON object per line.
std::string record_to_json_line(const Record& record);
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus_file(const std::filesystem::path& path, const Corpus& corpus);
Corpus read_corpus_file(const std::filesystem::path& path);

void write_filter_report(const std::filesystem::path& path, const FilterReport& report);
// `citing,cited` document ids, one edge per row, in node order.
void write_graph(const std::filesystem::path& path, const Corpus& corpus, const CitationGraph& graph);
// Reads an edge list against a fixed id ordering. Edges with unknown ids throw DataError.
CitationGraph read_graph(const std::filesystem::path& path, const std::vector<std::string>& ids);

}  // namespace branchscope
