#include "branchscope/keywords.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "branchscope/csv.hpp"

namespace branchscope {

std::optional<double> zscore(double observed, double cluster_size, double global_doc_freq, ZScoreMode mode) {
  if (!(cluster_size > 0.0) || !(global_doc_freq > 0.0) || !(global_doc_freq < 1.0)) return std::nullopt;
  const double expected = cluster_size * global_doc_freq;
  const double variance = expected * (1.0 - global_doc_freq);
  const double scale = mode == ZScoreMode::StdDev ? std::sqrt(variance) : variance;
  return (observed - expected) / scale;
}

ClusterWordStats::ClusterWordStats(std::vector<std::string> words, std::vector<std::size_t> cluster_sizes,
                                   std::vector<std::size_t> observed, std::size_t documents)
    : words_(std::move(words)),
      cluster_sizes_(std::move(cluster_sizes)),
      observed_(std::move(observed)),
      documents_(documents) {
  if (observed_.size() != words_.size() * cluster_sizes_.size()) {
    throw std::invalid_argument("observed counts do not match words x clusters");
  }
}

std::size_t ClusterWordStats::doc_freq(std::size_t w) const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < cluster_count(); ++k) n += observed(w, k);
  return n;
}

double ClusterWordStats::global_doc_freq(std::size_t w) const {
  return documents_ ? static_cast<double>(doc_freq(w)) / static_cast<double>(documents_) : 0.0;
}

ClusterWordStats cluster_word_stats(const DocTermMatrix& matrix, const Vocabulary& vocabulary,
                                    std::span<const int> labels, int clusters) {
  if (labels.size() != matrix.rows()) throw std::invalid_argument("labeling does not cover the matrix rows");
  if (vocabulary.size() != matrix.cols()) throw std::invalid_argument("vocabulary does not match matrix columns");
  const auto g = static_cast<std::size_t>(clusters);
  std::vector<std::size_t> sizes(g, 0);
  std::vector<std::size_t> observed(matrix.cols() * g, 0);
  for (std::size_t p = 0; p < matrix.rows(); ++p) {
    if (labels[p] < 0 || labels[p] >= clusters) throw std::invalid_argument("cluster label out of range");
    const auto k = static_cast<std::size_t>(labels[p]);
    ++sizes[k];
    for (auto col : matrix.row_indices(p)) ++observed[col * g + k];
  }
  return ClusterWordStats(vocabulary.words(), std::move(sizes), std::move(observed), matrix.rows());
}

KeywordTable top_keywords(const ClusterWordStats& stats, double top_frequency_quantile, std::size_t n,
                          ZScoreMode mode) {
  if (top_frequency_quantile < 0.0 || top_frequency_quantile > 1.0) {
    throw std::invalid_argument("top frequency quantile must lie in [0, 1]");
  }
  KeywordTable table;
  table.per_cluster.resize(stats.cluster_count());

  std::vector<std::size_t> order(stats.word_count());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto fa = stats.doc_freq(a), fb = stats.doc_freq(b);
    return fa != fb ? fa > fb : stats.word(a) < stats.word(b);
  });
  auto pool = static_cast<std::size_t>(std::ceil(top_frequency_quantile * static_cast<double>(order.size()) - 1e-9));
  pool = std::min(pool, order.size());
  order.resize(pool);
  table.pool_size = pool;

  for (std::size_t k = 0; k < stats.cluster_count(); ++k) {
    auto& ranked = table.per_cluster[k];
    const double nk = static_cast<double>(stats.cluster_size(k));
    for (auto w : order) {
      const double pw = stats.global_doc_freq(w);
      const auto obs = stats.observed(w, k);
      auto z = zscore(static_cast<double>(obs), nk, pw, mode);
      if (!z) {
        table.skipped.push_back({stats.word(w), static_cast<int>(k),
                                 nk == 0.0 ? "empty cluster" : (pw <= 0.0 ? "word absent" : "word in every document")});
        continue;
      }
      ranked.push_back({stats.word(w), static_cast<int>(k), obs, nk * pw, *z, pw});
    }
    std::sort(ranked.begin(), ranked.end(), [](const KeywordEntry& a, const KeywordEntry& b) {
      return a.zscore != b.zscore ? a.zscore > b.zscore : a.word < b.word;
    });
    if (ranked.size() > n) ranked.resize(n);
  }
  return table;
}

void write_keywords(const std::filesystem::path& path, const KeywordTable& table,
                    const std::vector<std::string>& cluster_names) {
  csv::Table t{{"cluster", "rank", "word", "frequency", "zscore"}, {}};
  for (std::size_t k = 0; k < table.per_cluster.size(); ++k) {
    const std::string name = k < cluster_names.size() ? cluster_names[k] : std::to_string(k);
    std::size_t rank = 1;
    for (const auto& e : table.per_cluster[k]) {
      t.rows.push_back({name, std::to_string(rank++), e.word, std::to_string(e.observed), csv::format_real(e.zscore)});
    }
  }
  csv::write_file(path, t);
}

}  // namespace branchscope
