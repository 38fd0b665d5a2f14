#include "branchscope/stages.hpp"

#include <fstream>

#include "branchscope/error.hpp"

namespace branchscope::stages {

void write_id_list(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  for (const auto& id : ids) out << id << '\n';
}

std::filesystem::path row_ids_path(const std::filesystem::path& matrix_path) {
  auto p = matrix_path;
  p += ".rows";
  return p;
}

std::filesystem::path doc_partition_path(const std::filesystem::path& dir, int k) {
  return dir / ("k" + std::to_string(k) + "_docs.csv");
}

std::filesystem::path word_partition_path(const std::filesystem::path& dir, int k) {
  return dir / ("k" + std::to_string(k) + "_words.csv");
}

void write_scan(const std::filesystem::path& dir, const std::vector<ScanEntry>& scan,
                const std::vector<std::string>& doc_ids, const std::vector<std::string>& words) {
  csv::Table summary{{"k", "Q", "iterations", "converged"}, {}};
  for (const auto& e : scan) {
    const auto& part = e.best.partition;
    summary.rows.push_back({std::to_string(e.k), csv::format_real(part.modularity), std::to_string(e.best.iterations),
                            e.best.converged ? "true" : "false"});
    write_labels(doc_partition_path(dir, e.k), "doc_id", doc_ids, part.row_labels);
    write_labels(word_partition_path(dir, e.k), "word", words, part.col_labels);
  }
  csv::write_file(dir / "scan.csv", summary);
}

csv::Table agreement_table(const std::vector<ScanEntry>& scan, int merge_k, int stable_group) {
  const CoPartition* base = nullptr;
  for (const auto& e : scan) {
    if (e.k == merge_k) base = &e.best.partition;
  }
  if (!base) throw ConfigError("k = " + std::to_string(merge_k) + " is not part of the scan");
  csv::Table t{{"k", "group", "stable_size", "group_size", "overlap"}, {}};
  for (const auto& e : scan) {
    if (e.k == merge_k) continue;
    for (int gid = 0; gid < e.best.partition.g; ++gid) {
      auto s = partition_agreement(*base, {stable_group}, e.best.partition, {gid});
      t.rows.push_back({std::to_string(e.k), std::to_string(gid), std::to_string(s.size_a), std::to_string(s.size_b),
                        std::to_string(s.overlap)});
    }
  }
  return t;
}

int resolve_stable_group(const std::string& spec, const CoPartition& partition, const Vocabulary& vocabulary) {
  constexpr std::string_view prefix = "word:";
  int group = -1;
  if (spec.rfind(prefix, 0) == 0) {
    auto word = spec.substr(prefix.size());
    auto col = vocabulary.find(word);
    if (col < 0) throw ConfigError("stable_group word '" + word + "' is not in the vocabulary");
    group = partition.col_labels.at(static_cast<std::size_t>(col));
  } else {
    try {
      std::size_t used = 0;
      group = std::stoi(spec, &used);
      if (used != spec.size()) group = -1;
    } catch (const std::exception&) {
      group = -1;
    }
    if (group < 0) throw ConfigError("stable_group must be a group id or word:<w>, got '" + spec + "'");
  }
  if (group >= partition.g) {
    throw ConfigError("stable_group " + std::to_string(group) + " out of range for k = " + std::to_string(partition.g));
  }
  return group;
}

KeywordTable branch_keywords(const DocTermMatrix& matrix, const Vocabulary& vocabulary,
                             const std::vector<Branch>& branches, double top_quantile, std::size_t n,
                             ZScoreMode mode) {
  std::vector<int> labels(branches.size());
  for (std::size_t i = 0; i < branches.size(); ++i) labels[i] = static_cast<int>(branches[i]);
  auto stats = cluster_word_stats(matrix, vocabulary, labels, 2);
  return top_keywords(stats, top_quantile, n, mode);
}

void write_skipped(const std::filesystem::path& path, const KeywordTable& table,
                   const std::vector<std::string>& cluster_names) {
  csv::Table t{{"cluster", "word", "reason"}, {}};
  for (const auto& s : table.skipped) {
    auto k = static_cast<std::size_t>(s.cluster);
    t.rows.push_back({k < cluster_names.size() ? cluster_names[k] : std::to_string(k), s.word, s.reason});
  }
  csv::write_file(path, t);
}

}  // namespace branchscope::stages
