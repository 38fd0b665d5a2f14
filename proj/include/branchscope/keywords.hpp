#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "branchscope/textprep.hpp"

namespace branchscope {

enum class ZScoreMode {
  StdDev,    // divide by sqrt(N_k * P_w * (1 - P_w))
  Variance,  // divide by N_k * P_w * (1 - P_w), as the formula is sometimes printed
};

// Binomial z-score of an observed in-cluster document count. Empty when
// P_w is 0 or 1 or the cluster is empty.
std::optional<double> zscore(double observed, double cluster_size, double global_doc_freq,
                             ZScoreMode mode = ZScoreMode::StdDev);

/// Document counts per (word, cluster).
///
/// observed(w, k) counts documents of cluster k that contain word w at least
/// once; global_doc_freq(w) is the fraction of all documents containing w.
class ClusterWordStats {
 public:
  ClusterWordStats(std::vector<std::string> words, std::vector<std::size_t> cluster_sizes,
                   std::vector<std::size_t> observed, std::size_t documents);

  std::size_t word_count() const noexcept { return words_.size(); }
  std::size_t cluster_count() const noexcept { return cluster_sizes_.size(); }
  std::size_t documents() const noexcept { return documents_; }
  const std::string& word(std::size_t w) const { return words_[w]; }
  std::size_t cluster_size(std::size_t k) const { return cluster_sizes_[k]; }
  std::size_t observed(std::size_t w, std::size_t k) const { return observed_[w * cluster_count() + k]; }
  std::size_t doc_freq(std::size_t w) const;
  double global_doc_freq(std::size_t w) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::size_t> cluster_sizes_;
  std::vector<std::size_t> observed_;  // row-major word x cluster
  std::size_t documents_;
};

// `labels[p]` in [0, clusters) is document p's cluster.
ClusterWordStats cluster_word_stats(const DocTermMatrix& matrix, const Vocabulary& vocabulary,
                                    std::span<const int> labels, int clusters);

struct KeywordEntry {
  std::string word;
  int cluster = 0;
  std::size_t observed = 0;
  double expected = 0.0;
  double zscore = 0.0;
  double global_doc_freq = 0.0;
};

struct SkippedWord {
  std::string word;
  int cluster = 0;
  std::string reason;
};

struct KeywordTable {
  std::vector<std::vector<KeywordEntry>> per_cluster;  // ranked, best first
  std::vector<SkippedWord> skipped;
  std::size_t pool_size = 0;
};

// Candidate pool: the ceil(quantile * |V|) words with the highest global
// document frequency (ties broken alphabetically). Within the pool words are
// ranked by z-score, descending, ties alphabetical; at most n per cluster.
KeywordTable top_keywords(const ClusterWordStats& stats, double top_frequency_quantile = 0.02, std::size_t n = 25,
                          ZScoreMode mode = ZScoreMode::StdDev);

// `cluster,rank,word,frequency,zscore`; frequency is the in-cluster document count.
void write_keywords(const std::filesystem::path& path, const KeywordTable& table,
                    const std::vector<std::string>& cluster_names);

}  // namespace branchscope
