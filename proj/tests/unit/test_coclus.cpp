#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>

#include "branchscope/coclus.hpp"
#include "branchscope/error.hpp"

using namespace branchscope;

namespace {

using Dense = std::vector<std::vector<double>>;

// Literal double sum over all same-label cells.
double brute_modularity(const Dense& a, const std::vector<int>& rl, const std::vector<int>& cl) {
  double s = 0;
  std::vector<double> rs(a.size(), 0.0), cs(a[0].size(), 0.0);
  for (std::size_t p = 0; p < a.size(); ++p) {
    for (std::size_t n = 0; n < a[p].size(); ++n) {
      rs[p] += a[p][n];
      cs[n] += a[p][n];
      s += a[p][n];
    }
  }
  double q = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    for (std::size_t n = 0; n < a[p].size(); ++n) {
      if (rl[p] == cl[n]) q += a[p][n] - rs[p] * cs[n] / s;
    }
  }
  return q / s;
}

// Exhaustive optimum over labelings where every cluster owns a row and a column.
double brute_optimum(const Dense& a, int g) {
  const std::size_t R = a.size(), C = a[0].size();
  std::vector<int> rl(R, 0), cl(C, 0);
  double best = -1e300;
  auto covers = [g](const std::vector<int>& l) {
    std::vector<bool> seen(static_cast<std::size_t>(g), false);
    for (int x : l) seen[static_cast<std::size_t>(x)] = true;
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  auto next = [g](std::vector<int>& l) {
    for (auto& x : l) {
      if (++x < g) return true;
      x = 0;
    }
    return false;
  };
  do {
    if (!covers(rl)) continue;
    std::fill(cl.begin(), cl.end(), 0);
    do {
      if (covers(cl)) best = std::max(best, brute_modularity(a, rl, cl));
    } while (next(cl));
  } while (next(rl));
  return best;
}

Dense random_int_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, int max) {
  Dense d(r, std::vector<double>(c));
  for (auto& row : d) {
    for (auto& x : row) x = static_cast<double>(rng() % static_cast<unsigned>(max + 1));
  }
  d[0][0] += 1;  // never all zero
  return d;
}

// Best agreement over label permutations.
double agreement(const std::vector<int>& a, const std::vector<int>& b, int g) {
  std::vector<int> perm(static_cast<std::size_t>(g));
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0;
  do {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hit += perm[static_cast<std::size_t>(a[i])] == b[i];
    best = std::max(best, static_cast<double>(hit) / static_cast<double>(a.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_SUITE("coclus") {

TEST_CASE("identity 2x2 matched diagonally gives one half") {
  auto m = DocTermMatrix::from_dense({{1, 0}, {0, 1}});
  std::vector<int> l{0, 1};
  CHECK(modularity(m, l, l) == 0.5);
  CHECK(brute_optimum({{1, 0}, {0, 1}}, 2) == 0.5);
  auto fit = coclus_fit(m, {2, 3, 100, 1e-9});
  CHECK(fit.partition.modularity == 0.5);
  CHECK(fit.partition.row_labels == fit.partition.col_labels);
}

TEST_CASE("modularity matches the double-sum oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t r = 2 + rng() % 7, c = 2 + rng() % 7;
    int g = 1 + static_cast<int>(rng() % 4);
    auto d = random_int_matrix(rng, r, c, 5);
    std::vector<int> rl(r), cl(c);
    for (auto& x : rl) x = static_cast<int>(rng() % static_cast<unsigned>(g));
    for (auto& x : cl) x = static_cast<int>(rng() % static_cast<unsigned>(g));
    auto m = DocTermMatrix::from_dense(d);
    CHECK(std::abs(modularity(m, rl, cl) - brute_modularity(d, rl, cl)) < 1e-12);
  }
}

TEST_CASE("single cluster gives zero; scaling and relabeling leave Q unchanged") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = random_int_matrix(rng, 20, 30, 4);
    auto m = DocTermMatrix::from_dense(d);
    std::vector<int> zr(20, 0), zc(30, 0);
    CHECK(std::abs(modularity(m, zr, zc)) < 1e-12);
    std::vector<int> rl(20), cl(30);
    for (auto& x : rl) x = static_cast<int>(rng() % 3);
    for (auto& x : cl) x = static_cast<int>(rng() % 3);
    double q = modularity(m, rl, cl);
    CHECK(std::abs(modularity(m.scaled(3.7), rl, cl) - q) < 1e-12);
    auto swap = [](std::vector<int> l) {
      for (auto& x : l) x = (x + 1) % 3;
      return l;
    };
    CHECK(std::abs(modularity(m, swap(rl), swap(cl)) - q) < 1e-12);
  }
}

TEST_CASE("all-zero matrix is rejected") {
  DocTermMatrix zero(3, 3, {});
  std::vector<int> l{0, 1, 0};
  CHECK_THROWS_AS(modularity(zero, l, l), DataError);
  CHECK_THROWS_AS(coclus_fit(zero, {2, 0, 10, 1e-9}), DataError);
}

TEST_CASE("too few nonzero rows for g") {
  auto m = DocTermMatrix::from_dense({{1, 1, 1}, {0, 0, 0}, {0, 0, 0}});
  CHECK_THROWS_AS(coclus_fit(m, {2, 0, 10, 1e-9}), DataError);
}

TEST_CASE("planted noise-free blocks are recovered at the brute-force optimum") {
  Dense d(7, std::vector<double>(6, 0.0));
  std::vector<int> rows{0, 0, 1, 1, 1, 2, 2}, cols{0, 1, 1, 2, 2, 0};
  for (std::size_t p = 0; p < 7; ++p) {
    for (std::size_t n = 0; n < 6; ++n) d[p][n] = rows[p] == cols[n] ? 1.0 + static_cast<double>((p + n) % 3) : 0.0;
  }
  auto m = DocTermMatrix::from_dense(d);
  auto best = coclus_fit_best(m, {3, 1, 100, 1e-9}, 20);
  CHECK(std::abs(best.partition.modularity - brute_optimum(d, 3)) < 1e-12);
  CHECK(agreement(best.partition.row_labels, rows, 3) == 1.0);
  CHECK(agreement(best.partition.col_labels, cols, 3) == 1.0);
}

TEST_CASE("best of 20 restarts reaches the exhaustive optimum on noisy small blocks") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    Dense d(6, std::vector<double>(6, 0.0));
    for (std::size_t p = 0; p < 6; ++p) {
      for (std::size_t n = 0; n < 6; ++n) {
        bool in = (p < 3) == (n < 3);
        d[p][n] = static_cast<double>(in ? 2 + rng() % 4 : rng() % 2);
      }
    }
    auto m = DocTermMatrix::from_dense(d);
    for (int g : {2, 3}) {
      auto best = coclus_fit_best(m, {g, static_cast<std::uint64_t>(trial), 100, 1e-9}, 20);
      CHECK(std::abs(best.partition.modularity - brute_optimum(d, g)) < 1e-12);
    }
  }
}

TEST_CASE("fits are deterministic, valid and monotone") {
  std::mt19937_64 rng(3);
  auto m = DocTermMatrix::from_dense(random_int_matrix(rng, 40, 25, 3));
  auto a = coclus_fit(m, {4, 17, 100, 1e-9});
  auto b = coclus_fit(m, {4, 17, 100, 1e-9});
  CHECK(a.partition.row_labels == b.partition.row_labels);
  CHECK(a.partition.col_labels == b.partition.col_labels);
  CHECK(a.partition.valid());
  CHECK(std::abs(a.partition.modularity - modularity(m, a.partition)) < 1e-12);
  for (std::size_t i = 1; i < a.q_trace.size(); ++i) CHECK(a.q_trace[i] >= a.q_trace[i - 1]);
}

TEST_CASE("zero rows are flagged and labeled 0") {
  auto m = DocTermMatrix::from_dense({{3, 0, 0}, {0, 0, 0}, {0, 2, 1}, {0, 1, 2}});
  auto fit = coclus_fit(m, {2, 0, 100, 1e-9});
  REQUIRE(fit.zero_rows == std::vector<std::size_t>{1});
  CHECK(fit.partition.row_labels[1] == 0);
}

TEST_CASE("scan over k") {
  Dense d(30, std::vector<double>(15, 0.0));
  std::mt19937_64 rng(8);
  for (std::size_t p = 0; p < 30; ++p) {
    for (std::size_t n = 0; n < 15; ++n) {
      d[p][n] = (p / 10 == n / 5) ? static_cast<double>(1 + rng() % 3) : (rng() % 10 == 0 ? 1.0 : 0.0);
    }
  }
  auto m = DocTermMatrix::from_dense(d);
  auto scan = scan_k(m, 2, 5, 10, 1);
  REQUIRE(scan.size() == 4);
  auto peak = std::max_element(scan.begin(), scan.end(), [](const auto& a, const auto& b) {
    return a.best.partition.modularity < b.best.partition.modularity;
  });
  CHECK(peak->k == 3);
  CHECK(scan_k(m, 2, 2, 2, 1).size() == 1);
}

TEST_CASE("partition agreement") {
  std::vector<int> a{0, 0, 1, 1, 2}, b{1, 1, 1, 0, 0};
  CHECK(partition_agreement(a, 3, {0}, a, 3, {0}).overlap == 2);
  auto s = partition_agreement(a, 3, {1}, b, 2, {1});
  CHECK(s.size_a == 2);
  CHECK(s.size_b == 3);
  CHECK(s.overlap == 1);
  CHECK(partition_agreement(a, 3, {2}, b, 2, {1}).overlap == 0);
  CHECK(partition_agreement(a, 3, {0, 1}, b, 2, {1}).overlap == 3);
  CHECK_THROWS_AS(partition_agreement(a, 3, {3}, b, 2, {1}), std::invalid_argument);
}

TEST_CASE("merge to branches") {
  CoPartition p{3, {0, 2, 1, 2}, {2, 0, 1}, 0.0};
  auto b = merge_to_branches(p, 2);
  CHECK(b.documents == std::vector<Branch>{Branch::A, Branch::T, Branch::A, Branch::T});
  CHECK(b.t_word_count == 1);
  CHECK(b.a_word_count == 2);
  CHECK(b.count(Branch::T) + b.count(Branch::A) == 4);

  CoPartition two{2, {0, 1, 1}, {1, 0}, 0.0};
  auto m = merge_to_branches(two, 0);
  CHECK(m.documents == std::vector<Branch>{Branch::T, Branch::A, Branch::A});
}

TEST_CASE("label and branch files round trip") {
  auto dir = std::filesystem::temp_directory_path();
  std::vector<std::string> keys{"d1", "d2", "d,3"};
  std::vector<int> labels{2, 0, 1};
  write_labels(dir / "bs_labels.csv", "doc_id", keys, labels);
  auto lf = read_labels(dir / "bs_labels.csv");
  CHECK(lf.keys == keys);
  CHECK(lf.labels == labels);
  CHECK(lf.g == 3);
  std::vector<Branch> br{Branch::T, Branch::A, Branch::A};
  write_branches(dir / "bs_branches.csv", "doc_id", keys, br);
  CHECK(read_branches(dir / "bs_branches.csv").branches == br);
}

}
