#include <doctest.h>

#include <cmath>

#include "branchscope/keywords.hpp"

using namespace branchscope;

TEST_SUITE("keywords") {

TEST_CASE("z-score values") {
  CHECK(std::abs(*zscore(20, 100, 0.1) - 10.0 / 3.0) < 1e-12);
  CHECK(*zscore(10, 100, 0.1) == 0.0);
  CHECK(*zscore(5, 100, 0.1) < 0.0);
  CHECK(std::abs(*zscore(20, 100, 0.1, ZScoreMode::Variance) - 10.0 / 9.0) < 1e-12);
  CHECK_FALSE(zscore(5, 100, 0.0).has_value());
  CHECK_FALSE(zscore(5, 100, 1.0).has_value());
  CHECK_FALSE(zscore(0, 0, 0.5).has_value());
}

TEST_CASE("cluster word statistics match a hand tally") {
  // Six documents, two clusters; counts are documents, not occurrences.
  TokenizedCorpus docs{{"a", "a", "b"}, {"a"}, {"c"}, {"b", "c"}, {"a", "b", "c"}, {"c", "c"}};
  Vocabulary v({"a", "b", "c"}, {3, 3, 4}, 0.0);
  auto m = build_matrix(docs, v);
  std::vector<int> labels{0, 0, 0, 1, 1, 1};
  auto s = cluster_word_stats(m, v, labels, 2);
  CHECK(s.observed(0, 0) == 2);
  CHECK(s.observed(0, 1) == 1);
  CHECK(s.observed(1, 0) == 1);
  CHECK(s.observed(1, 1) == 2);
  CHECK(s.observed(2, 0) == 1);
  CHECK(s.observed(2, 1) == 3);
  CHECK(s.cluster_size(0) == 3);
  for (std::size_t w = 0; w < 3; ++w) CHECK(s.doc_freq(w) == s.observed(w, 0) + s.observed(w, 1));
  CHECK(s.global_doc_freq(2) == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("saturated and absent words are skipped with a reason") {
  TokenizedCorpus docs{{"all", "x"}, {"all"}, {"all", "x"}};
  Vocabulary v({"all", "x"}, {3, 2}, 0.0);
  auto m = build_matrix(docs, v);
  std::vector<int> labels{0, 1, 1};
  auto table = top_keywords(cluster_word_stats(m, v, labels, 2), 1.0, 10);
  CHECK(table.skipped.size() == 2);
  CHECK(table.skipped[0].word == "all");
  CHECK(table.per_cluster[0].size() == 1);
}

TEST_CASE("a frequent cluster-exclusive word ranks first") {
  // 50 documents: cluster 0 always contains "special"; everyone shares fillers.
  TokenizedCorpus docs(50);
  std::vector<int> labels(50);
  for (std::size_t i = 0; i < 50; ++i) {
    labels[i] = i < 20 ? 0 : 1;
    if (i < 20) docs[i].push_back("special");
    if (i % 2) docs[i].push_back("half");
    if (i % 3) docs[i].push_back("third");
    if (i >= 20 && i % 4 == 0) docs[i].push_back("other");
  }
  auto v = build_vocabulary(docs, 0.0);
  auto m = build_matrix(docs, v);
  auto stats = cluster_word_stats(m, v, labels, 2);
  auto table = top_keywords(stats, 1.0, 25);
  REQUIRE(!table.per_cluster[0].empty());
  CHECK(table.per_cluster[0][0].word == "special");
  CHECK(table.per_cluster[0][0].observed == 20);

  // Brute-force ranking: sort every word by z descending, then alphabetically.
  std::vector<std::pair<double, std::string>> brute;
  for (std::size_t w = 0; w < stats.word_count(); ++w) {
    if (auto z = zscore(static_cast<double>(stats.observed(w, 1)), 30, stats.global_doc_freq(w))) {
      brute.emplace_back(-*z, stats.word(w));
    }
  }
  std::sort(brute.begin(), brute.end());
  REQUIRE(brute.size() == table.per_cluster[1].size());
  for (std::size_t i = 0; i < brute.size(); ++i) CHECK(table.per_cluster[1][i].word == brute[i].second);

  // Two clusters: z-scores of a word have opposite signs.
  for (const auto& e : table.per_cluster[0]) {
    for (const auto& f : table.per_cluster[1]) {
      if (e.word == f.word) CHECK(e.zscore * f.zscore <= 1e-12);
    }
  }
  CHECK(top_keywords(stats, 1.0, 0).per_cluster[0].empty());
}

TEST_CASE("pool keeps the top quantile by document frequency") {
  TokenizedCorpus docs{{"a", "b", "c", "d"}, {"a", "b", "c"}, {"a", "b"}, {"a"}};
  auto v = build_vocabulary(docs, 0.0);
  auto m = build_matrix(docs, v);
  std::vector<int> labels{0, 0, 1, 1};
  auto table = top_keywords(cluster_word_stats(m, v, labels, 2), 0.5, 25);
  CHECK(table.pool_size == 2);
  // "a" is in every document and is skipped; only "b" is ranked.
  REQUIRE(table.per_cluster[0].size() == 1);
  CHECK(table.per_cluster[0][0].word == "b");
}

}
