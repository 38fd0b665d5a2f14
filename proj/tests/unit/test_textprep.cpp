#include <doctest.h>

#include <fstream>
#include <map>
#include <random>

#include "branchscope/error.hpp"
#include "branchscope/stemmer.hpp"
#include "branchscope/textprep.hpp"

using namespace branchscope;

TEST_SUITE("textprep") {

TEST_CASE("porter stemmer matches the frozen reference list") {
  std::ifstream in(BRANCHSCOPE_TEST_DATA "/porter_reference.txt");
  REQUIRE(in);
  std::string word, stem;
  std::size_t n = 0, bad = 0;
  while (in >> word >> stem) {
    ++n;
    if (porter_stem(word) != stem) {
      ++bad;
      MESSAGE(word << " -> " << porter_stem(word) << ", expected " << stem);
    }
  }
  CHECK(n > 1000);
  CHECK(bad == 0);
}

TEST_CASE("tokenizer examples") {
  auto cfg = TokenPipelineConfig::standard();
  CHECK(tokenize("Graphene-based supercapacitors", cfg) == std::vector<std::string>{"graphen", "base", "supercapacitor"});
  CHECK(tokenize("the of and", cfg).empty());
  CHECK(tokenize("", cfg).empty());
  CHECK(tokenize("In 2004, 3 layers of C60 (x)", cfg) == std::vector<std::string>{"layer", "c60"});

  TokenPipelineConfig raw;
  raw.stemmer = Stemmer::None;
  raw.fold_case = false;
  raw.min_token_len = 1;
  CHECK(tokenize("Spin-Orbit a B", raw) == std::vector<std::string>{"Spin", "Orbit", "a", "B"});
}

TEST_CASE("non-ascii bytes stay inside tokens and are not stemmed") {
  auto cfg = TokenPipelineConfig::standard();
  auto t = tokenize("Schr\xc3\xb6" "dinger equations", cfg);
  REQUIRE(t.size() == 2);
  CHECK(t[0] == "schr\xc3\xb6" "dinger");
  CHECK(t[1] == "equat");
}

TEST_CASE("vocabulary threshold is strict and relative to document count") {
  TokenizedCorpus docs(115988);
  for (std::size_t i = 0; i < 12; ++i) docs[i].push_back("twelve");
  for (std::size_t i = 0; i < 11; ++i) docs[i].push_back("eleven");
  for (auto& d : docs) d.push_back("common");
  auto v = build_vocabulary(docs, 0.0001);
  CHECK(v.words() == std::vector<std::string>{"common", "twelve"});
  CHECK(v.doc_freq() == std::vector<std::size_t>{115988, 12});
  CHECK(v.find("eleven") == -1);
  CHECK(v.find("twelve") == 1);
}

TEST_CASE("threshold zero keeps every distinct token; empty vocabulary is fatal") {
  TokenizedCorpus docs{{"b", "a"}, {"c", "a", "a"}, {}};
  auto v = build_vocabulary(docs, 0.0);
  CHECK(v.words() == std::vector<std::string>{"a", "b", "c"});
  CHECK_THROWS_AS(build_vocabulary(docs, 0.9), DataError);
}

TEST_CASE("token frequency mode") {
  TokenizedCorpus docs{{"a", "a", "a"}, {"b"}};
  // 4 tokens, threshold 0.5 -> need more than 2 occurrences.
  auto v = build_vocabulary(docs, 0.5, FrequencyMode::Token);
  CHECK(v.words() == std::vector<std::string>{"a"});
}

TEST_CASE("matrix counts and conservation") {
  TokenizedCorpus docs{{"graphen", "graphen", "sensor"}, {"noword"}, {"sensor", "graphen"}};
  Vocabulary v({"graphen", "sensor"}, {2, 2}, 0.0);
  auto m = build_matrix(docs, v);
  CHECK(m.rows() == 3);
  CHECK(m.at(0, 0) == 2.0);
  CHECK(m.at(0, 1) == 1.0);
  CHECK(m.row_indices(1).empty());
  CHECK(m.total() == 5.0);

  // Random corpus: total equals an independent recount of in-vocabulary tokens.
  std::mt19937 rng(7);
  TokenizedCorpus big(200);
  for (auto& d : big) {
    auto n = rng() % 30;
    for (unsigned i = 0; i < n; ++i) d.push_back("w" + std::to_string(rng() % 60));
  }
  auto vb = build_vocabulary(big, 0.05);
  auto mb = build_matrix(big, vb);
  double recount = 0;
  for (const auto& d : big) {
    for (const auto& t : d) recount += vb.find(t) >= 0 ? 1 : 0;
  }
  CHECK(mb.total() == recount);
  auto rs = mb.row_sums();
  for (std::size_t p = 0; p < big.size(); ++p) {
    double own = 0;
    for (const auto& t : big[p]) own += vb.find(t) >= 0 ? 1 : 0;
    CHECK(rs[p] == own);
  }
}

TEST_CASE("removing a document changes only its row and the frequencies") {
  TokenizedCorpus docs{{"a", "b"}, {"b", "c"}, {"a", "c", "c"}};
  Vocabulary v({"a", "b", "c"}, {2, 2, 2}, 0.0);
  auto full = build_matrix(docs, v);
  docs.erase(docs.begin() + 1);
  auto less = build_matrix(docs, v);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(less.at(0, c) == full.at(0, c));
    CHECK(less.at(1, c) == full.at(2, c));
  }
}

TEST_CASE("sparse matrix operations") {
  auto m = DocTermMatrix::from_dense({{0, 2, 0}, {1, 0, 3}});
  CHECK(m.nonzeros() == 3);
  auto t = m.transposed();
  CHECK(t.rows() == 3);
  CHECK(t.at(2, 1) == 3.0);
  CHECK(t.transposed() == m);
  CHECK(m.scaled(2.0).total() == 12.0);
  CHECK(DocTermMatrix(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}).at(0, 0) == 3.0);
  CHECK_THROWS(DocTermMatrix(2, 2, {{0, 0, -1.0}}));
}

TEST_CASE("matrix file round trip keeps trailing empty rows") {
  auto m = DocTermMatrix::from_dense({{0, 2, 0}, {1, 0, 3}, {0, 0, 0}});
  auto path = std::filesystem::temp_directory_path() / "bs_matrix.csv";
  write_matrix(path, m);
  CHECK(read_matrix(path, 3, 3) == m);
}

}
