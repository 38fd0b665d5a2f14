#include "branchscope/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "branchscope/csv.hpp"
#include "branchscope/error.hpp"

namespace branchscope {

using nlohmann::json;

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool contains_word(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return false;
  std::size_t pos = haystack.find(needle);
  while (pos != std::string_view::npos) {
    bool left = pos == 0 || !is_word_char(haystack[pos - 1]);
    std::size_t end = pos + needle.size();
    bool right = end == haystack.size() || !is_word_char(haystack[end]);
    if (left && right) return true;
    pos = haystack.find(needle, pos + 1);
  }
  return false;
}

// clang-format off
const std::pair<const char*, const char*> kBundledRegions[] = {
    {"china", "CN"}, {"peoples r china", "CN"}, {"p r china", "CN"}, {"prc", "CN"},
    {"hong kong", "HK"}, {"macau", "MO"}, {"taiwan", "TW"},
    {"usa", "US"}, {"u s a", "US"}, {"united states", "US"}, {"united states of america", "US"},
    {"japan", "JP"}, {"germany", "DE"}, {"south korea", "KR"}, {"korea", "KR"},
    {"republic of korea", "KR"}, {"iran", "IR"}, {"india", "IN"}, {"russia", "RU"},
    {"russian federation", "RU"}, {"united kingdom", "GB"}, {"uk", "GB"}, {"england", "GB"},
    {"scotland", "GB"}, {"wales", "GB"}, {"north ireland", "GB"}, {"france", "FR"},
    {"spain", "ES"}, {"italy", "IT"}, {"singapore", "SG"}, {"australia", "AU"},
    {"canada", "CA"}, {"brazil", "BR"}, {"netherlands", "NL"}, {"switzerland", "CH"},
    {"sweden", "SE"}, {"poland", "PL"}, {"belgium", "BE"}, {"austria", "AT"},
    {"denmark", "DK"}, {"finland", "FI"}, {"norway", "NO"}, {"ireland", "IE"},
    {"portugal", "PT"}, {"greece", "GR"}, {"czech republic", "CZ"}, {"israel", "IL"},
    {"turkey", "TR"}, {"saudi arabia", "SA"}, {"egypt", "EG"}, {"pakistan", "PK"},
    {"malaysia", "MY"}, {"thailand", "TH"}, {"vietnam", "VN"}, {"viet nam", "VN"},
    {"mexico", "MX"}, {"argentina", "AR"}, {"chile", "CL"}, {"south africa", "ZA"},
    {"new zealand", "NZ"}, {"ukraine", "UA"}, {"romania", "RO"}, {"hungary", "HU"},
    {"indonesia", "ID"}, {"philippines", "PH"}, {"bangladesh", "BD"}, {"iraq", "IQ"},
    {"tunisia", "TN"}, {"algeria", "DZ"}, {"morocco", "MA"}, {"nigeria", "NG"},
    {"slovakia", "SK"}, {"slovenia", "SI"}, {"croatia", "HR"}, {"serbia", "RS"},
    {"qatar", "QA"}, {"u arab emirates", "AE"}, {"united arab emirates", "AE"},
};
// clang-format on

}  // namespace

// ---------------------------------------------------------------------------
// RegionMap

RegionMap::RegionMap(std::vector<std::pair<std::string, std::string>> pattern_to_code) {
  for (auto& [pattern, code] : pattern_to_code) {
    auto p = to_lower(trim(pattern));
    auto c = to_upper(trim(code));
    if (p.empty() || c.empty()) continue;
    patterns_.emplace_back(std::move(p), c);
    codes_.push_back(std::move(c));
  }
  std::sort(patterns_.begin(), patterns_.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
    return a.first < b.first;
  });
  std::sort(codes_.begin(), codes_.end());
  codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
}

RegionMap RegionMap::bundled() {
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& [p, c] : kBundledRegions) entries.emplace_back(p, c);
  return RegionMap(std::move(entries));
}

RegionMap RegionMap::from_csv(const std::filesystem::path& path) {
  auto table = csv::read_file(path);
  auto pattern_col = table.column("pattern");
  auto code_col = table.column("code");
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& row : table.rows) entries.emplace_back(row[pattern_col], row[code_col]);
  if (entries.empty()) throw ConfigError("region map " + path.string() + " is empty");
  return RegionMap(std::move(entries));
}

std::string RegionMap::lookup(std::string_view raw) const {
  // Punctuation is folded to spaces so "P.R. China" matches "p r china".
  std::string text = to_lower(raw);
  for (auto& c : text) {
    if (!is_word_char(c) && !(static_cast<unsigned char>(c) & 0x80)) c = ' ';
  }
  for (const auto& [pattern, code] : patterns_) {
    if (contains_word(text, pattern)) return code;
  }
  return std::string(kUnknownRegion);
}

bool RegionMap::is_known(std::string_view code) const {
  return std::binary_search(codes_.begin(), codes_.end(), code);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string require_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

std::string optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

std::optional<int> parse_year(const json& obj) {
  auto it = obj.find("year");
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_number_integer()) return it->get<int>();
  if (it->is_string()) {
    auto s = std::string(trim(it->get<std::string>()));
    if (s.empty()) return std::nullopt;
    std::size_t used = 0;
    int y = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument("field 'year' is not an integer");
    return y;
  }
  throw std::invalid_argument("field 'year' is not an integer");
}

Record record_from_json(const json& obj, const RegionMap& regions, bool trust_regions) {
  if (!obj.is_object()) throw std::invalid_argument("line is not a JSON object");
  Record r;
  r.id = std::string(trim(require_string(obj, "id")));
  if (r.id.empty()) throw std::invalid_argument("field 'id' is empty");
  auto doi = std::string(trim(optional_string(obj, "doi")));
  if (!doi.empty()) r.doi = std::move(doi);
  r.title = require_string(obj, "title");
  r.abstract = optional_string(obj, "abstract");
  r.year = parse_year(obj);
  r.doc_type = std::string(trim(require_string(obj, "doc_type")));

  if (auto it = obj.find("authors"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw std::invalid_argument("field 'authors' is not a list");
    for (const auto& a : *it) {
      if (!a.is_object()) throw std::invalid_argument("author entry is not an object");
      Author author;
      author.name = optional_string(a, "name");
      if (auto af = a.find("affiliations"); af != a.end() && !af->is_null()) {
        if (!af->is_array()) throw std::invalid_argument("field 'affiliations' is not a list");
        for (const auto& entry : *af) {
          Affiliation aff;
          std::string region;
          if (entry.is_string()) {
            aff.raw = entry.get<std::string>();
          } else if (entry.is_object()) {
            aff.raw = optional_string(entry, "raw");
            region = to_upper(trim(optional_string(entry, "region")));
          } else {
            throw std::invalid_argument("affiliation entry is neither string nor object");
          }
          if (!region.empty() && (trust_regions || regions.is_known(region) || region == kUnknownRegion)) {
            aff.region = region;
          } else {
            aff.region = regions.lookup(aff.raw);
          }
          author.affiliations.push_back(std::move(aff));
        }
      }
      r.authors.push_back(std::move(author));
    }
  }

  if (auto it = obj.find("references"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw std::invalid_argument("field 'references' is not a list");
    for (const auto& ref : *it) {
      if (!ref.is_string()) throw std::invalid_argument("reference is not a string");
      auto s = std::string(trim(ref.get<std::string>()));
      if (!s.empty()) r.references.push_back(std::move(s));
    }
  }
  return r;
}

}  // namespace

ParseResult parse_records(std::istream& in, const ParseOptions& options) {
  static const RegionMap kBundled = RegionMap::bundled();
  const RegionMap& regions = options.regions ? *options.regions : kBundled;

  ParseResult result;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    std::optional<std::string> converted;
    if (options.converter) {
      converted = options.converter(view);
      if (!converted) continue;
      view = *converted;
    }
    if (trim(view).empty()) continue;
    Record record;
    try {
      record = record_from_json(json::parse(view), regions, options.trust_regions);
    } catch (const std::exception& e) {
      result.errors.push_back({line_no, e.what()});
      continue;
    }
    auto [it, inserted] = seen.emplace(record.id, line_no);
    if (!inserted) {
      throw DataError("duplicate record id '" + record.id + "' on lines " + std::to_string(it->second) + " and " +
                      std::to_string(line_no));
    }
    result.records.push_back(std::move(record));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Filtering

std::string_view to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::DocType: return "doc_type";
    case ExclusionReason::MissingDoi: return "missing_doi";
    case ExclusionReason::MissingYear: return "missing_year";
    case ExclusionReason::YearOutOfRange: return "year_out_of_range";
  }
  return "unknown";
}

std::size_t FilterReport::total_excluded() const {
  std::size_t n = 0;
  for (const auto& [reason, count] : excluded) n += count;
  return n;
}

Corpus::Corpus(std::vector<Record> documents) : documents_(std::move(documents)) {
  index_.reserve(documents_.size());
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    if (!index_.emplace(documents_[i].id, i).second) {
      throw DataError("duplicate record id '" + documents_[i].id + "'");
    }
  }
}

std::optional<std::size_t> Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FilteredCorpus filter_corpus(std::vector<Record> records, const FilterOptions& options) {
  int max_year = options.max_year;
  if (max_year == 0) {
    auto today = std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
    max_year = static_cast<int>(today.year());
  }
  FilterReport report;
  for (auto reason : {ExclusionReason::DocType, ExclusionReason::MissingDoi, ExclusionReason::MissingYear,
                      ExclusionReason::YearOutOfRange}) {
    report.excluded[reason] = 0;
  }
  std::vector<Record> kept;
  for (auto& r : records) {
    std::optional<ExclusionReason> reason;
    if (to_lower(trim(r.doc_type)) != "article") {
      reason = ExclusionReason::DocType;
    } else if (!r.doi || trim(*r.doi).empty()) {
      reason = ExclusionReason::MissingDoi;
    } else if (!r.year) {
      reason = ExclusionReason::MissingYear;
    } else if (*r.year < options.min_year || *r.year > max_year) {
      reason = ExclusionReason::YearOutOfRange;
    }
    if (reason) {
      ++report.excluded[*reason];
    } else {
      kept.push_back(std::move(r));
    }
  }
  report.retained = kept.size();
  if (kept.empty()) throw DataError("no analyzable documents");
  return {Corpus(std::move(kept)), report};
}

// ---------------------------------------------------------------------------
// Citation graph

std::string normalize_doi(std::string_view doi) {
  std::string d = to_lower(trim(doi));
  for (std::string_view prefix : {"https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "http://dx.doi.org/",
                                  "doi.org/", "doi:"}) {
    if (d.starts_with(prefix)) {
      d.erase(0, prefix.size());
      break;
    }
  }
  return std::string(trim(d));
}

CitationGraph::CitationGraph(std::vector<std::vector<std::uint32_t>> references, CitationStats stats)
    : refs_(std::move(references)), stats_(stats) {
  for (std::size_t i = 0; i < refs_.size(); ++i) {
    auto& r = refs_[i];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    std::erase(r, static_cast<std::uint32_t>(i));
    for (auto target : r) {
      if (target >= refs_.size()) throw DataError("citation edge points outside the graph");
    }
    edges_ += r.size();
  }
}

CitationGraph build_citation_graph(const Corpus& corpus) {
  std::unordered_map<std::string, std::uint32_t> by_doi;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].doi) by_doi.emplace(normalize_doi(*corpus[i].doi), static_cast<std::uint32_t>(i));
  }
  CitationStats stats;
  std::vector<std::vector<std::uint32_t>> refs(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::set<std::uint32_t> targets;
    for (const auto& ref : corpus[i].references) {
      ++stats.references;
      std::optional<std::uint32_t> target;
      if (auto pos = corpus.find(ref)) {
        target = static_cast<std::uint32_t>(*pos);
      } else if (auto it = by_doi.find(normalize_doi(ref)); it != by_doi.end()) {
        target = it->second;
      }
      if (!target) {
        ++stats.external;
        continue;
      }
      ++stats.resolved;
      if (*target == i) {
        ++stats.self;
      } else if (!targets.insert(*target).second) {
        ++stats.duplicates;
      }
    }
    refs[i].assign(targets.begin(), targets.end());
  }
  return CitationGraph(std::move(refs), stats);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json record_to_json(const Record& r) {
  json obj;
  obj["id"] = r.id;
  obj["doi"] = r.doi ? json(*r.doi) : json(nullptr);
  obj["title"] = r.title;
  obj["abstract"] = r.abstract;
  obj["year"] = r.year ? json(*r.year) : json(nullptr);
  obj["doc_type"] = r.doc_type;
  json authors = json::array();
  for (const auto& a : r.authors) {
    json affs = json::array();
    for (const auto& af : a.affiliations) affs.push_back({{"raw", af.raw}, {"region", af.region}});
    authors.push_back({{"name", a.name}, {"affiliations", std::move(affs)}});
  }
  obj["authors"] = std::move(authors);
  obj["references"] = r.references;
  return obj;
}

}  // namespace

std::string record_to_json_line(const Record& record) { return record_to_json(record).dump(); }

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& r : corpus.documents()) out << record_to_json_line(r) << '\n';
}

void write_corpus_file(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_corpus(out, corpus);
}

Corpus read_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus " + path.string());
  ParseOptions options;
  options.trust_regions = true;
  auto parsed = parse_records(in, options);
  if (!parsed.errors.empty()) {
    const auto& e = parsed.errors.front();
    throw DataError(path.string() + ":" + std::to_string(e.line) + ": " + e.message);
  }
  return Corpus(std::move(parsed.records));
}

void write_filter_report(const std::filesystem::path& path, const FilterReport& report) {
  csv::Table table{{"reason", "count"}, {}};
  for (const auto& [reason, count] : report.excluded) table.rows.push_back({std::string(to_string(reason)), std::to_string(count)});
  table.rows.push_back({"retained", std::to_string(report.retained)});
  csv::write_file(path, table);
}

void write_graph(const std::filesystem::path& path, const Corpus& corpus, const CitationGraph& graph) {
  csv::Table table{{"citing", "cited"}, {}};
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    for (auto target : graph.references(i)) table.rows.push_back({corpus[i].id, corpus[target].id});
  }
  csv::write_file(path, table);
}

CitationGraph read_graph(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], static_cast<std::uint32_t>(i));
  auto table = csv::read_file(path);
  auto citing = table.column("citing");
  auto cited = table.column("cited");
  std::vector<std::vector<std::uint32_t>> refs(ids.size());
  for (const auto& row : table.rows) {
    auto a = index.find(row[citing]);
    auto b = index.find(row[cited]);
    if (a == index.end() || b == index.end()) {
      throw DataError("graph edge " + row[citing] + " -> " + row[cited] + " references an unknown document");
    }
    refs[a->second].push_back(b->second);
  }
  return CitationGraph(std::move(refs));
}

}  // namespace branchscope
