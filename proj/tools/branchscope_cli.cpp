// Command-line front end. Every subcommand reads and writes the same files as
// the corresponding pipeline stage.

#include <unistd.h>

#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "branchscope/credit.hpp"
#include "branchscope/dependency.hpp"
#include "branchscope/error.hpp"
#include "branchscope/ingest.hpp"
#include "branchscope/keywords.hpp"
#include "branchscope/report.hpp"
#include "branchscope/stages.hpp"
#include "branchscope/synth.hpp"

namespace fs = std::filesystem;
using namespace branchscope;

namespace {

std::set<int> parse_groups(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.insert(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("bad group id '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("no group ids given");
  return out;
}

RootMode parse_root_mode(const std::string& s) {
  if (s == "indicator") return RootMode::Indicator;
  if (s == "skip") return RootMode::Skip;
  throw ConfigError("--root-mode must be indicator or skip");
}

TokenPipelineConfig token_config(const std::string& stopwords, std::size_t min_len) {
  auto tp = TokenPipelineConfig::standard();
  if (!stopwords.empty()) tp.stopwords = read_stopwords(stopwords);
  tp.min_token_len = min_len;
  return tp;
}

// Branch labels aligned with the corpus order; ids must match exactly.
std::vector<Branch> aligned_branches(const Corpus& corpus, const fs::path& path) {
  auto file = read_branches(path);
  if (file.keys.size() != corpus.size()) {
    throw DataError("branch file has " + std::to_string(file.keys.size()) + " rows, corpus has " +
                    std::to_string(corpus.size()));
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (file.keys[i] != corpus[i].id) throw DataError("branch file row " + std::to_string(i + 1) + " is not " + corpus[i].id);
  }
  return file.branches;
}

std::vector<std::optional<int>> corpus_years(const Corpus& corpus) {
  std::vector<std::optional<int>> years;
  for (const auto& d : corpus.documents()) years.push_back(d.year);
  return years;
}

// Interactive stable-group choice for `run` without a configured group.
int ask_stable_group(const std::vector<ScanEntry>& scan, int merge_k, const std::vector<std::string>& vocabulary) {
  if (!::isatty(STDIN_FILENO)) {
    throw ConfigError("stable_group is not set and stdin is not a terminal; pass --stable-group");
  }
  std::cerr << "k  Q\n";
  for (const auto& e : scan) std::cerr << e.k << "  " << csv::format_real(e.best.partition.modularity) << "\n";
  const CoPartition* part = nullptr;
  for (const auto& e : scan) {
    if (e.k == merge_k) part = &e.best.partition;
  }
  std::cerr << "\nGroups at k = " << merge_k << ":\n";
  auto rows = part->row_cluster_sizes();
  for (int g = 0; g < part->g; ++g) {
    std::cerr << "  " << g << ": " << rows[static_cast<std::size_t>(g)] << " documents; words:";
    int shown = 0;
    for (std::size_t w = 0; w < vocabulary.size() && shown < 8; ++w) {
      if (part->col_labels[w] == g) {
        std::cerr << ' ' << vocabulary[w];
        ++shown;
      }
    }
    std::cerr << "\n";
    for (const auto& e : scan) {
      if (e.k == merge_k) continue;
      std::cerr << "     best overlap at k = " << e.k << ":";
      std::size_t best = 0;
      for (int h = 0; h < e.best.partition.g; ++h) {
        best = std::max(best, partition_agreement(*part, {g}, e.best.partition, {h}).overlap);
      }
      std::cerr << ' ' << best << "\n";
    }
  }
  std::cerr << "Stable group id: " << std::flush;
  int g = -1;
  if (!(std::cin >> g)) throw ConfigError("no stable group entered");
  return g;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "input",     "out_dir",     "region_map",   "stopwords",   "threshold", "threshold_mode", "min_token_len",
      "k_min",     "k_max",       "restarts",     "seed",        "max_iter",  "tol",            "merge_k",
      "stable_group", "top_quantile", "top_n",    "zscore_mode", "r",         "root_mode",      "sweep_steps",
      "min_share", "trend_start", "trend_end"};
  return keys;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branch analysis of publication corpora by document-word co-clustering"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // ingest
  std::string in_path, out_path, region_map, report_path, graph_path, errors_path;
  auto* ingest = app.add_subcommand("ingest", "Parse, filter and snapshot a JSON-lines export");
  ingest->add_option("--input", in_path)->required();
  ingest->add_option("--out", out_path, "corpus snapshot (JSON lines)")->required();
  ingest->add_option("--region-map", region_map, "CSV pattern,code");
  ingest->add_option("--report", report_path, "filter report CSV (default <out dir>/filter_report.csv)");
  ingest->add_option("--graph", graph_path, "citation edge list (default <out dir>/graph.csv)");
  ingest->add_option("--errors", errors_path, "parse error CSV (default <out dir>/parse_errors.csv)");

  // textprep
  std::string corpus_path, matrix_out, vocab_out, stopwords_path, threshold_mode = "document";
  double threshold = 0.0001;
  std::size_t min_token_len = 2;
  auto* textprep = app.add_subcommand("textprep", "Tokenize, build the vocabulary and the document-term matrix");
  textprep->add_option("--corpus", corpus_path)->required();
  textprep->add_option("--out-matrix", matrix_out)->required();
  textprep->add_option("--out-vocab", vocab_out)->required();
  textprep->add_option("--threshold", threshold)->capture_default_str();
  textprep->add_option("--threshold-mode", threshold_mode)->check(CLI::IsMember({"document", "token"}))->capture_default_str();
  textprep->add_option("--stopwords", stopwords_path);
  textprep->add_option("--min-token-len", min_token_len)->capture_default_str();

  // cluster
  std::string matrix_path, vocab_path, out_dir;
  int k_min = 2, k_max = 9, restarts = 10, max_iter = 100;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  auto* cluster = app.add_subcommand("cluster", "Scan k and write best-of-restarts co-partitions");
  cluster->add_option("--matrix", matrix_path)->required();
  cluster->add_option("--vocab", vocab_path)->required();
  cluster->add_option("--k-min", k_min)->capture_default_str();
  cluster->add_option("--k-max", k_max)->capture_default_str();
  cluster->add_option("--restarts", restarts)->capture_default_str();
  cluster->add_option("--seed", seed)->capture_default_str();
  cluster->add_option("--max-iter", max_iter)->capture_default_str();
  cluster->add_option("--tol", tol)->capture_default_str();
  cluster->add_option("--out", out_dir)->required();

  // agree
  std::string part_a, part_b, group_a, group_b;
  auto* agree = app.add_subcommand("agree", "Overlap between groups of two partitions");
  agree->add_option("--partition-a", part_a)->required();
  agree->add_option("--group-a", group_a, "comma separated ids")->required();
  agree->add_option("--partition-b", part_b)->required();
  agree->add_option("--group-b", group_b, "comma separated ids")->required();
  agree->add_option("--out", out_path, "CSV output (default stdout)");

  // merge
  std::string partition_path, word_partition_path, stable_group, words_out;
  auto* merge = app.add_subcommand("merge", "Collapse a partition into T (stable group) and A");
  merge->add_option("--partition", partition_path, "doc_id,label CSV")->required();
  merge->add_option("--stable-group", stable_group, "group id, or word:<w> with --word-partition")->required();
  merge->add_option("--word-partition", word_partition_path, "word,label CSV of the same fit");
  merge->add_option("--out", out_path, "doc_id,branch CSV")->required();
  merge->add_option("--out-words", words_out, "word,branch CSV (needs --word-partition)");

  // keywords
  std::string branches_path, skipped_out, zscore_mode = "stddev";
  double top_quantile = 0.02;
  std::size_t top_n = 25;
  auto* keywords = app.add_subcommand("keywords", "Rank branch keywords by z-score");
  keywords->add_option("--corpus", corpus_path)->required();
  keywords->add_option("--branches", branches_path)->required();
  keywords->add_option("--vocab", vocab_path)->required();
  keywords->add_option("--top-quantile", top_quantile)->capture_default_str();
  keywords->add_option("--n", top_n)->capture_default_str();
  keywords->add_option("--zscore-mode", zscore_mode)->check(CLI::IsMember({"stddev", "variance"}))->capture_default_str();
  keywords->add_option("--stopwords", stopwords_path);
  keywords->add_option("--min-token-len", min_token_len)->capture_default_str();
  keywords->add_option("--out", out_path)->required();
  keywords->add_option("--out-skipped", skipped_out);

  // credit
  std::string ledger_out, shares_out, region_year_out, by;
  double min_share = 0.02;
  auto* credit = app.add_subcommand("credit", "Fractional regional credit");
  credit->add_option("--corpus", corpus_path)->required();
  credit->add_option("--branches", branches_path)->required();
  credit->add_option("--out-ledger", ledger_out)->required();
  credit->add_option("--out-shares", shares_out)->required();
  credit->add_option("--out-region-year", region_year_out);
  credit->add_option("--min-share", min_share)->capture_default_str();
  credit->add_option("--by", by, "comma list of year,region,branch");

  // trend
  int trend_start = 2004;
  std::optional<int> trend_end;
  auto* trend = app.add_subcommand("trend", "Yearly proportion of T and A papers");
  trend->add_option("--corpus", corpus_path)->required();
  trend->add_option("--branches", branches_path)->required();
  trend->add_option("--start", trend_start)->capture_default_str();
  trend->add_option("--end", trend_end);
  trend->add_option("--out", out_path)->required();

  // dependency
  std::string graph_in, root_mode = "indicator", scores_path;
  double r = 0.5;
  auto* dependency = app.add_subcommand("dependency", "Per-paper dependency on T");
  dependency->add_option("--graph", graph_in)->required();
  dependency->add_option("--branches", branches_path)->required();
  dependency->add_option("--r", r)->capture_default_str();
  dependency->add_option("--root-mode", root_mode)->capture_default_str();
  dependency->add_option("--out", out_path)->required();

  std::string report_by;
  auto* dep_report = app.add_subcommand("dependency-report", "Group means of dependency scores");
  dep_report->add_option("--scores", scores_path)->required();
  dep_report->add_option("--corpus", corpus_path)->required();
  dep_report->add_option("--branches", branches_path)->required();
  dep_report->add_option("--by", report_by)->check(CLI::IsMember({"year", "region"}));
  dep_report->add_option("--out", out_path)->required();

  int r_steps = 11;
  auto* dep_sweep = app.add_subcommand("dependency-sweep", "Group means across r in [0, 1]");
  dep_sweep->add_option("--graph", graph_in)->required();
  dep_sweep->add_option("--branches", branches_path)->required();
  dep_sweep->add_option("--r-steps", r_steps)->capture_default_str();
  dep_sweep->add_option("--root-mode", root_mode)->capture_default_str();
  dep_sweep->add_option("--out", out_path)->required();

  // chart
  std::string table_path, kind = "line", x_col, y_col, series_col, title;
  auto* chart = app.add_subcommand("chart", "Render a CSV table as a static SVG chart");
  chart->add_option("--table", table_path)->required();
  chart->add_option("--kind", kind)->check(CLI::IsMember({"line", "bar"}))->capture_default_str();
  chart->add_option("--x", x_col)->required();
  chart->add_option("--y", y_col)->required();
  chart->add_option("--series", series_col);
  chart->add_option("--title", title);
  chart->add_option("--out", out_path)->required();

  // run
  std::string config_path;
  std::map<std::string, std::string> overrides;
  auto* run = app.add_subcommand("run", "Full pipeline from a key = value config file");
  run->add_option("--config", config_path)->required();
  for (const auto& key : config_keys()) {
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    std::string names = "--" + dashed;
    if (dashed != key) names += ",--" + key;
    run->add_option_function<std::string>(names, [&overrides, key](const std::string& v) { overrides[key] = v; },
                                          "override " + key);
  }

  // synth
  std::string truth_out;
  synth::Params sp;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus with known structure");
  synth_cmd->add_option("--out", out_path)->required();
  synth_cmd->add_option("--truth", truth_out, "JSON with the generator's ground truth");
  synth_cmd->add_option("--docs", sp.documents)->capture_default_str();
  synth_cmd->add_option("--seed", sp.seed)->capture_default_str();
  synth_cmd->add_option("--r", r, "r used for the analytic dependency in --truth")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ingest->parsed()) {
      auto regions = region_map.empty() ? RegionMap::bundled() : RegionMap::from_csv(region_map);
      std::ifstream in(in_path, std::ios::binary);
      if (!in) throw ConfigError("cannot open " + in_path);
      ParseOptions po;
      po.regions = &regions;
      auto parsed = parse_records(in, po);
      const fs::path dir = fs::path(out_path).parent_path();
      csv::Table errors{{"line", "message"}, {}};
      for (const auto& e : parsed.errors) {
        errors.rows.push_back({std::to_string(e.line), e.message});
        std::cerr << "warning: line " << e.line << ": " << e.message << "\n";
      }
      csv::write_file(errors_path.empty() ? dir / "parse_errors.csv" : fs::path(errors_path), errors);
      auto filtered = filter_corpus(std::move(parsed.records));
      auto graph = build_citation_graph(filtered.corpus);
      write_corpus_file(out_path, filtered.corpus);
      write_filter_report(report_path.empty() ? dir / "filter_report.csv" : fs::path(report_path), filtered.report);
      write_graph(graph_path.empty() ? dir / "graph.csv" : fs::path(graph_path), filtered.corpus, graph);
      std::cerr << filtered.corpus.size() << " documents retained, " << filtered.report.total_excluded()
                << " excluded, " << graph.edge_count() << " citation edges\n";
    } else if (textprep->parsed()) {
      auto corpus = read_corpus_file(corpus_path);
      auto tokens = tokenize_corpus(corpus, token_config(stopwords_path, min_token_len));
      auto vocab = build_vocabulary(tokens, threshold,
                                    threshold_mode == "token" ? FrequencyMode::Token : FrequencyMode::Document);
      auto matrix = build_matrix(tokens, vocab);
      std::vector<std::string> ids;
      for (const auto& d : corpus.documents()) ids.push_back(d.id);
      write_matrix(matrix_out, matrix);
      stages::write_id_list(stages::row_ids_path(matrix_out), ids);
      write_vocabulary(vocab_out, vocab);
      std::cerr << matrix.rows() << " x " << matrix.cols() << " matrix, " << matrix.nonzeros() << " nonzeros\n";
    } else if (cluster->parsed()) {
      if (k_min < 2 || k_max < k_min) throw ConfigError("need 2 <= k-min <= k-max");
      if (restarts < 1 || max_iter < 1) throw ConfigError("restarts and max-iter must be positive");
      auto ids = read_word_list(stages::row_ids_path(matrix_path));
      auto words = read_word_list(vocab_path);
      auto matrix = read_matrix(matrix_path, ids.size(), words.size());
      fs::create_directories(out_dir);
      auto scan = scan_k(matrix, k_min, k_max, restarts, seed, max_iter, tol);
      stages::write_scan(out_dir, scan, ids, words);
      for (const auto& e : scan) std::cout << e.k << "," << csv::format_real(e.best.partition.modularity) << "\n";
    } else if (agree->parsed()) {
      auto a = read_labels(part_a), b = read_labels(part_b);
      if (a.keys != b.keys) throw DataError("partitions cover different documents");
      AgreementStats s;
      try {
        s = partition_agreement(a.labels, a.g, parse_groups(group_a), b.labels, b.g, parse_groups(group_b));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      csv::Table t{{"size_a", "size_b", "overlap"},
                   {{std::to_string(s.size_a), std::to_string(s.size_b), std::to_string(s.overlap)}}};
      if (out_path.empty()) csv::write(std::cout, t);
      else csv::write_file(out_path, t);
    } else if (merge->parsed()) {
      auto docs = read_labels(partition_path);
      CoPartition part;
      part.row_labels = docs.labels;
      part.g = docs.g;
      Vocabulary vocab;
      std::vector<std::string> words;
      if (!word_partition_path.empty()) {
        auto w = read_labels(word_partition_path);
        part.col_labels = w.labels;
        part.g = std::max(part.g, w.g);
        words = w.keys;
        vocab = Vocabulary(words, std::vector<std::size_t>(words.size(), 0), 0.0);
      } else if (!words_out.empty() || stable_group.rfind("word:", 0) == 0) {
        throw ConfigError("--word-partition is required for word:<w> and --out-words");
      }
      int g = stages::resolve_stable_group(stable_group, part, vocab);
      auto labeling = merge_to_branches(part, g);
      write_branches(out_path, "doc_id", docs.keys, labeling.documents);
      if (!words_out.empty()) write_branches(words_out, "word", words, labeling.words);
    } else if (keywords->parsed()) {
      if (top_quantile < 0.0 || top_quantile > 1.0) throw ConfigError("--top-quantile must lie in [0, 1]");
      auto corpus = read_corpus_file(corpus_path);
      auto branches = aligned_branches(corpus, branches_path);
      auto words = read_word_list(vocab_path);
      Vocabulary vocab(words, std::vector<std::size_t>(words.size(), 0), 0.0);
      auto matrix = build_matrix(tokenize_corpus(corpus, token_config(stopwords_path, min_token_len)), vocab);
      auto table = stages::branch_keywords(matrix, vocab, branches, top_quantile, top_n,
                                           zscore_mode == "variance" ? ZScoreMode::Variance : ZScoreMode::StdDev);
      write_keywords(out_path, table, {"T", "A"});
      if (!skipped_out.empty()) stages::write_skipped(skipped_out, table, {"T", "A"});
    } else if (credit->parsed()) {
      GroupBy group_by;
      std::stringstream ss(by);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item == "year") group_by.year = true;
        else if (item == "branch") group_by.branch = true;
        else if (item != "region") throw ConfigError("--by accepts year, region and branch");
      }
      auto corpus = read_corpus_file(corpus_path);
      auto branches = aligned_branches(corpus, branches_path);
      auto ledger = build_ledger(corpus);
      for (auto i : ledger.warnings) std::cerr << "warning: " << corpus[i].id << " has no authors\n";
      write_ledger(ledger_out, corpus, ledger);
      write_shares(shares_out, aggregate_shares(corpus, ledger, branches, group_by).filtered(min_share));
      if (!region_year_out.empty()) {
        write_region_year(region_year_out, region_year_proportions(corpus, ledger, branches));
      }
    } else if (trend->parsed()) {
      auto corpus = read_corpus_file(corpus_path);
      auto branches = aligned_branches(corpus, branches_path);
      csv::write_file(out_path, to_table(yearly_trend(corpus_years(corpus), branches, trend_start, trend_end)));
    } else if (dependency->parsed() || dep_sweep->parsed()) {
      if (r < 0.0 || r > 1.0) throw ConfigError("--r must lie in [0, 1]");
      if (r_steps < 2) throw ConfigError("--r-steps must be at least 2");
      auto labels = read_branches(branches_path);
      auto graph = read_graph(graph_in, labels.keys);
      DependencyConfig dc;
      dc.r = r;
      dc.root_mode = parse_root_mode(root_mode);
      if (dependency->parsed()) {
        auto prop = propagate(graph.adjacency(), labels.branches, dc);
        write_scores(out_path, labels.keys, prop.scores);
      } else {
        write_sweep(out_path, dependency_sweep(graph.adjacency(), labels.branches, r_steps, dc));
      }
    } else if (dep_report->parsed()) {
      auto corpus = read_corpus_file(corpus_path);
      auto branches = aligned_branches(corpus, branches_path);
      auto scores = read_scores(scores_path);
      if (scores.ids.size() != corpus.size()) throw DataError("score file does not match the corpus");
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (scores.ids[i] != corpus[i].id) throw DataError("score file row " + std::to_string(i + 1) + " is not " + corpus[i].id);
      }
      auto years = corpus_years(corpus);
      if (report_by.empty()) {
        write_group_table(out_path, group_average(scores.scores, branches));
      } else if (report_by == "year") {
        write_yearly(out_path, yearly_average(scores.scores, branches, years));
      } else {
        std::vector<std::optional<std::string>> regions;
        for (const auto& d : corpus.documents()) regions.push_back(single_region(d));
        write_regional(out_path, region_average(scores.scores, branches, years, regions));
      }
    } else if (chart->parsed()) {
      ChartSpec spec;
      spec.kind = kind == "bar" ? ChartSpec::Kind::Bar : ChartSpec::Kind::Line;
      spec.title = title;
      spec.x_column = x_col;
      spec.y_column = y_col;
      spec.series_column = series_col;
      emit_chart(out_path, csv::read_file(table_path), spec);
    } else if (run->parsed()) {
      auto config = PipelineConfig::from_file(config_path);
      for (const auto& [key, value] : overrides) config.set(key, value);
      auto result = run_pipeline(config, ask_stable_group);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      std::cerr << "k = " << result.merge_k << ", stable group " << result.stable_group << "; "
                << result.manifest.size() << " artifacts in " << result.out_dir.string() << "\n";
    } else if (synth_cmd->parsed()) {
      if (sp.documents < 100) throw ConfigError("--docs must be at least 100");
      auto corpus = synth::generate(sp);
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw ConfigError("cannot write " + out_path);
      synth::write_records(out, corpus.records);
      if (!truth_out.empty()) synth::write_truth(truth_out, sp, corpus.truth, r);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const StageError& e) {
    std::cerr << "stage failure in " << e.stage() << ": " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
