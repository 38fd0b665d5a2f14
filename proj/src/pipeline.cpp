#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>

#include "branchscope/credit.hpp"
#include "branchscope/error.hpp"
#include "branchscope/ingest.hpp"
#include "branchscope/report.hpp"
#include "branchscope/stages.hpp"

namespace branchscope {

namespace {

namespace fs = std::filesystem;

class LockFile {
 public:
  explicit LockFile(fs::path path) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      if (errno == EEXIST) {
        throw StageError("lock", "another run holds " + path_.string() + "; remove it if no run is active");
      }
      throw StageError("lock", "cannot create " + path_.string() + ": " + std::strerror(errno));
    }
    auto pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd_, pid.data(), pid.size());
  }
  ~LockFile() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

// Runs one stage, tagging failures with its name. Config errors pass through.
template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

fs::path sibling(const fs::path& dir, const char* suffix) {
  auto p = dir.lexically_normal();
  if (!p.has_filename()) p = p.parent_path();
  p += suffix;
  return p;
}

void write_text(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, const StableGroupPrompt& prompt) {
  config.validate();
  if (!fs::is_regular_file(config.input)) throw ConfigError("input file not found: " + config.input.string());
  if (config.stable_group.empty() && !prompt) {
    throw ConfigError("stable_group is not configured and no interactive prompt is available");
  }

  const fs::path final_dir = config.out_dir.lexically_normal();
  LockFile lock(sibling(final_dir, ".lock"));
  const fs::path out = sibling(final_dir, ".partial");
  fs::remove_all(out);

  PipelineResult result;
  try {
    for (const char* sub : {"ingest", "textprep", "cluster", "branches", "keywords", "credit", "trend", "dependency",
                            "charts"}) {
      fs::create_directories(out / sub);
    }

    // -- ingest
    auto [corpus, graph] = stage("ingest", [&] {
      auto regions = config.region_map.empty() ? RegionMap::bundled() : RegionMap::from_csv(config.region_map);
      std::ifstream in(config.input, std::ios::binary);
      if (!in) throw DataError("cannot open " + config.input.string());
      ParseOptions po;
      po.regions = &regions;
      auto parsed = parse_records(in, po);
      csv::Table errors{{"line", "message"}, {}};
      for (const auto& e : parsed.errors) {
        errors.rows.push_back({std::to_string(e.line), e.message});
        result.warnings.push_back("ingest: line " + std::to_string(e.line) + ": " + e.message);
      }
      csv::write_file(out / "ingest/parse_errors.csv", errors);
      auto filtered = filter_corpus(std::move(parsed.records));
      auto g = build_citation_graph(filtered.corpus);
      write_corpus_file(out / "ingest/corpus.jsonl", filtered.corpus);
      write_filter_report(out / "ingest/filter_report.csv", filtered.report);
      write_graph(out / "ingest/graph.csv", filtered.corpus, g);
      return std::pair{std::move(filtered.corpus), std::move(g)};
    });
    std::vector<std::string> ids;
    std::vector<std::optional<int>> years;
    for (const auto& d : corpus.documents()) {
      ids.push_back(d.id);
      years.push_back(d.year);
    }

    // -- textprep
    auto [vocab, matrix] = stage("textprep", [&] {
      auto tp = TokenPipelineConfig::standard();
      if (!config.stopwords.empty()) tp.stopwords = read_stopwords(config.stopwords);
      tp.min_token_len = config.min_token_len;
      auto tokens = tokenize_corpus(corpus, tp);
      auto v = build_vocabulary(tokens, config.threshold, config.threshold_mode);
      auto m = build_matrix(tokens, v);
      write_matrix(out / "textprep/matrix.csv", m);
      stages::write_id_list(stages::row_ids_path(out / "textprep/matrix.csv"), ids);
      write_vocabulary(out / "textprep/vocab.txt", v);
      return std::pair{std::move(v), std::move(m)};
    });

    // -- cluster
    auto scan = stage("cluster", [&] {
      auto s = scan_k(matrix, config.k_min, config.k_max, config.restarts, config.seed, config.max_iter, config.tol);
      stages::write_scan(out / "cluster", s, ids, vocab.words());
      return s;
    });
    {
      const auto& first = scan.front().best;
      if (!first.zero_rows.empty()) {
        result.warnings.push_back("textprep: " + std::to_string(first.zero_rows.size()) +
                                  " documents have no vocabulary words and carry label 0");
      }
      for (const auto& e : scan) {
        if (!e.best.converged) {
          result.warnings.push_back("cluster: best fit for k = " + std::to_string(e.k) + " hit max_iter");
        }
      }
    }

    // -- merge
    result.merge_k = config.merge_k.value_or(0);
    if (!config.merge_k) {
      double best = 0.0;
      for (const auto& e : scan) {
        if (result.merge_k == 0 || e.best.partition.modularity > best) {
          best = e.best.partition.modularity;
          result.merge_k = e.k;
        }
      }
    }
    const auto& merge_part = scan[static_cast<std::size_t>(result.merge_k - config.k_min)].best.partition;
    result.stable_group = config.stable_group.empty()
                              ? prompt(scan, result.merge_k, vocab.words())
                              : stages::resolve_stable_group(config.stable_group, merge_part, vocab);
    if (result.stable_group < 0 || result.stable_group >= merge_part.g) {
      throw ConfigError("stable group " + std::to_string(result.stable_group) + " out of range");
    }
    auto labeling = stage("merge", [&] {
      csv::write_file(out / "cluster/agreement.csv", stages::agreement_table(scan, result.merge_k, result.stable_group));
      auto b = merge_to_branches(merge_part, result.stable_group);
      write_branches(out / "branches/doc_branches.csv", "doc_id", ids, b.documents);
      write_branches(out / "branches/word_branches.csv", "word", vocab.words(), b.words);
      return b;
    });
    const auto& branches = labeling.documents;

    // -- keywords
    stage("keywords", [&] {
      const std::vector<std::string> names{"T", "A"};
      auto table = stages::branch_keywords(matrix, vocab, branches, config.top_quantile, config.top_n,
                                           config.zscore_mode);
      write_keywords(out / "keywords/keywords.csv", table, names);
      stages::write_skipped(out / "keywords/skipped.csv", table, names);
    });

    // -- credit
    auto region_year = stage("credit", [&] {
      auto ledger = build_ledger(corpus);
      for (auto i : ledger.warnings) {
        result.warnings.push_back("credit: " + corpus[i].id + " has no authors; credit assigned to UNKNOWN");
      }
      write_ledger(out / "credit/ledger.csv", corpus, ledger);
      write_shares(out / "credit/shares.csv", aggregate_shares(corpus, ledger, branches, {}).filtered(config.min_share));
      write_shares(out / "credit/shares_branch.csv",
                   aggregate_shares(corpus, ledger, branches, {false, true}).filtered(config.min_share));
      write_shares(out / "credit/shares_year_branch.csv",
                   aggregate_shares(corpus, ledger, branches, {true, true}).filtered(config.min_share));
      auto ry = region_year_proportions(corpus, ledger, branches);
      write_region_year(out / "credit/region_year.csv", ry);
      return ry;
    });

    // -- trend
    auto trend = stage("trend", [&] {
      auto t = yearly_trend(years, branches, config.trend_start, config.trend_end);
      csv::write_file(out / "trend/yearly.csv", to_table(t));
      return t;
    });

    // -- dependency
    stage("dependency", [&] {
      DependencyConfig dc;
      dc.r = config.r;
      dc.root_mode = config.root_mode;
      auto prop = propagate(graph.adjacency(), branches, dc);
      write_scores(out / "dependency/scores.csv", ids, prop.scores);
      // Aggregate from the written scores so the standalone report reproduces these tables.
      auto scores = read_scores(out / "dependency/scores.csv").scores;
      write_group_table(out / "dependency/groups.csv", group_average(scores, branches));
      write_yearly(out / "dependency/yearly.csv", yearly_average(scores, branches, years));
      std::vector<std::optional<std::string>> regions;
      for (const auto& d : corpus.documents()) regions.push_back(single_region(d));
      write_regional(out / "dependency/regional.csv", region_average(scores, branches, years, regions));
      write_sweep(out / "dependency/sweep.csv", dependency_sweep(graph.adjacency(), branches, config.sweep_steps, dc));
    });

    // -- charts
    stage("charts", [&] {
      ChartSpec trend_chart{ChartSpec::Kind::Line, "Yearly share of T and A papers", "year", "proportion", "branch",
                            "year", "share of papers", 0.0, 1.0};
      emit_chart(out / "charts/yearly_trend.svg", to_table(trend), trend_chart);

      auto shares = csv::read_file(out / "credit/shares_branch.csv");
      ChartSpec share_chart{ChartSpec::Kind::Bar, "Regional share of credit by branch", "region", "share", "branch",
                            "region", "share of credit", 0.0, std::nullopt};
      emit_chart(out / "charts/region_shares.svg", shares, share_chart);

      // Region-year T proportion, limited to regions above the share cutoff.
      std::set<std::string> major;
      auto overall = csv::read_file(out / "credit/shares.csv");
      for (const auto& row : overall.rows) {
        if (row[0] != kUnknownRegion) major.insert(row[0]);
      }
      csv::Table ry{{"region", "year", "prop_T"}, {}};
      for (const auto& r : region_year) {
        if (!major.count(r.region)) continue;
        ry.rows.push_back({r.region, std::to_string(r.year),
                           r.proportions ? csv::format_real(r.proportions->first) : std::string()});
      }
      ChartSpec ry_chart{ChartSpec::Kind::Line, "Share of T credit per region", "year", "prop_T", "region",
                         "year", "T share of credit", 0.0, 1.0};
      emit_chart(out / "charts/region_year.svg", ry, ry_chart);

      ChartSpec dep_chart{ChartSpec::Kind::Line, "Mean dependency on T by group", "year", "D_T", "group",
                          "year", "mean D_T", 0.0, 1.0};
      emit_chart(out / "charts/dependency_yearly.svg", csv::read_file(out / "dependency/yearly.csv"), dep_chart);
    });

    write_text(out / "warnings.txt", result.warnings);

    result.manifest = stage("manifest", [&] {
      auto entries = build_manifest(out);
      csv::Table t{{"path", "sha256", "bytes"}, {}};
      for (const auto& e : entries) t.rows.push_back({e.path, e.sha256, std::to_string(e.bytes)});
      csv::write_file(out / "manifest.csv", t);
      return entries;
    });

    stage("finalize", [&] {
      fs::remove_all(final_dir);
      fs::rename(out, final_dir);
    });
  } catch (...) {
    std::error_code ec;
    fs::remove_all(out, ec);
    throw;
  }
  result.out_dir = final_dir;
  return result;
}

}  // namespace branchscope
