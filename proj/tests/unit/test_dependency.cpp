#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>

#include "branchscope/dependency.hpp"
#include "branchscope/error.hpp"

using namespace branchscope;

namespace {

// Memoized recursion straight from the definition; DAGs only.
std::vector<std::optional<double>> oracle(const Adjacency& refs, const std::vector<Branch>& labels, double r) {
  std::vector<std::optional<double>> memo(refs.size());
  std::vector<bool> done(refs.size(), false);
  std::function<std::optional<double>(std::size_t)> D = [&](std::size_t v) -> std::optional<double> {
    if (done[v]) return memo[v];
    if (refs[v].empty()) {
      done[v] = true;
      return memo[v] = std::nullopt;
    }
    double t = 0, sum = 0;
    for (auto m : refs[v]) {
      t += labels[m] == Branch::T;
      auto dm = D(m);
      sum += dm ? *dm : (labels[m] == Branch::T ? 1.0 : 0.0);
    }
    double n = static_cast<double>(refs[v].size());
    done[v] = true;
    return memo[v] = r * (t / n) + (1 - r) * (sum / n);
  };
  for (std::size_t v = 0; v < refs.size(); ++v) D(v);
  return memo;
}

Adjacency random_dag(std::mt19937_64& rng, std::size_t n, double p) {
  Adjacency g(n);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w = 0; w < v; ++w) {
      if (u(rng) < p) g[v].push_back(static_cast<std::uint32_t>(w));
    }
  }
  // Relabel nodes so that the order is not already topological.
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Adjacency out(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (auto w : g[v]) out[perm[v]].push_back(perm[w]);
    std::sort(out[perm[v]].begin(), out[perm[v]].end());
  }
  return out;
}

}  // namespace

TEST_SUITE("dependency") {

TEST_CASE("direct dependency") {
  std::vector<Branch> labels(10, Branch::A);
  for (int i = 0; i < 3; ++i) labels[static_cast<std::size_t>(i)] = Branch::T;
  std::vector<std::uint32_t> refs{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(*direct_dependency(refs, labels) == doctest::Approx(0.3));
  CHECK(*direct_dependency(std::vector<std::uint32_t>{0, 1}, labels) == 1.0);
  CHECK_FALSE(direct_dependency({}, labels).has_value());
}

TEST_CASE("four-node example") {
  // 0 = T root R, 1 = A paper B citing R, 2 = A paper C citing B and S, 3 = A root S.
  Adjacency g{{}, {0}, {1, 3}, {}};
  std::vector<Branch> labels{Branch::T, Branch::A, Branch::A, Branch::A};
  for (double r : {0.0, 0.3, 0.5, 1.0}) {
    auto s = propagate(g, labels, {r}).scores;
    CHECK(s[1].D_t == doctest::Approx(1.0));
  }
  auto s = propagate(g, labels, {0.5}).scores;
  CHECK(s[0].status == DependencyStatus::Root);
  CHECK(s[3].status == DependencyStatus::Root);
  CHECK(s[2].d_t == 0.0);
  CHECK(*s[2].i_t == doctest::Approx(0.5));
  CHECK(s[2].D_t == doctest::Approx(0.25));
  CHECK(s[2].D_a() == doctest::Approx(0.75));

  DependencyConfig skip{0.5, RootMode::Skip};
  auto k = propagate(g, labels, skip).scores;
  CHECK_FALSE(k[1].i_t.has_value());
  CHECK(k[1].D_t == 1.0);
  CHECK(k[2].D_t == doctest::Approx(0.5 * 0.0 + 0.5 * 1.0));
}

TEST_CASE("random DAGs match the recursive oracle and the global iteration") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 1 + rng() % 12;
    auto g = random_dag(rng, n, 0.35);
    std::vector<Branch> labels(n);
    for (auto& l : labels) l = rng() % 2 ? Branch::T : Branch::A;
    for (double r : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      auto got = propagate(g, labels, {r}).scores;
      auto want = oracle(g, labels, r);
      auto fixed = propagate_fixed_point(g, labels, {r}).scores;
      for (std::size_t v = 0; v < n; ++v) {
        REQUIRE(got[v].defined() == want[v].has_value());
        if (!want[v]) continue;
        CHECK(std::abs(got[v].D_t - *want[v]) <= 1e-10);
        CHECK(std::abs(fixed[v].D_t - got[v].D_t) <= 1e-10);
        CHECK(got[v].D_t + got[v].D_a() == 1.0);
        CHECK(got[v].D_t >= 0.0);
        CHECK(got[v].D_t <= 1.0);
        if (r == 1.0) CHECK(got[v].D_t == got[v].d_t);
        if (r == 0.0) CHECK(got[v].D_t == doctest::Approx(*got[v].i_t).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("cycles converge to a fixed point") {
  // 0 <-> 1 cycle, both also citing a T root 2.
  Adjacency g{{1, 2}, {0, 2}, {}};
  std::vector<Branch> labels{Branch::A, Branch::A, Branch::T};
  auto res = propagate(g, labels, {0.5});
  CHECK(res.cyclic_components == 1);
  // Fixed point: D = 0.5*0.5 + 0.5*(D + 1)/2 -> D = 1.
  CHECK(res.scores[0].D_t == doctest::Approx(0.5 * 0.5 + 0.5 * (res.scores[1].D_t + 1) / 2).epsilon(1e-9));
  // Pure 2-cycle at r = 0 still settles thanks to damping.
  Adjacency two{{1}, {0}};
  std::vector<Branch> mixed{Branch::T, Branch::A};
  auto z = propagate(two, mixed, {0.0});
  CHECK(z.scores[0].D_t == doctest::Approx(z.scores[1].D_t));
}

TEST_CASE("non-convergence is a stage failure") {
  Adjacency g{{1}, {2}, {0}};
  std::vector<Branch> labels{Branch::T, Branch::A, Branch::A};
  DependencyConfig cfg{0.1, RootMode::Indicator, 1e-14, 2};
  CHECK_THROWS_AS(propagate(g, labels, cfg), StageError);
}

TEST_CASE("group, yearly and regional means") {
  Adjacency g{{}, {0}, {0, 1}, {}, {3}, {0, 3}};
  std::vector<Branch> labels{Branch::T, Branch::T, Branch::A, Branch::A, Branch::A, Branch::T};
  auto s = propagate(g, labels, {0.5}).scores;
  auto t = group_average(s, labels);
  CHECK(t.t_group.count == 2);
  CHECK(*t.t_group.mean_t == doctest::Approx((s[1].D_t + s[5].D_t) / 2));
  CHECK(*t[Branch::A].mean_t == doctest::Approx((s[2].D_t + s[4].D_t) / 2));
  CHECK(*t.t_group.mean_t + *t.t_group.mean_a() == doctest::Approx(1.0));

  std::vector<std::optional<int>> one_year(6, 2010);
  auto y = yearly_average(s, labels, one_year);
  REQUIRE(y.size() == 1);
  CHECK(*y.at(2010).t_group.mean_t == *t.t_group.mean_t);

  std::vector<std::optional<int>> years{2009, 2010, 2010, 2009, 2011, 2011};
  auto yy = yearly_average(s, labels, years);
  CHECK_FALSE(yy.at(2009).t_group.mean_t.has_value());  // only roots
  CHECK(*yy.at(2011).a_group.mean_t == doctest::Approx(s[4].D_t));

  std::vector<std::optional<std::string>> regions{"US", "US", "CN", std::nullopt, "CN", "US"};
  auto reg = region_average(s, labels, years, regions);
  CHECK(*reg.at("US").at(2011).t_group.mean_t == doctest::Approx(s[5].D_t));
  CHECK(*reg.at("CN").at(2010).a_group.mean_t == doctest::Approx(s[2].D_t));
}

TEST_CASE("single-region papers") {
  Record r;
  Author a, b;
  a.affiliations = {{"x", "CN"}};
  b.affiliations = {{"y", "CN"}, {"z", "CN"}};
  r.authors = {a, b};
  CHECK(single_region(r) == "CN");
  r.authors[1].affiliations.push_back({"w", "US"});
  CHECK_FALSE(single_region(r).has_value());
  r.authors = {a, Author{}};
  CHECK_FALSE(single_region(r).has_value());
}

TEST_CASE("own-branch roots give a diagonal table") {
  Adjacency g{{}, {}, {0}, {1}, {0, 2}, {1, 3}};
  std::vector<Branch> labels{Branch::T, Branch::A, Branch::T, Branch::A, Branch::T, Branch::A};
  auto t = group_average(propagate(g, labels, {0.5}).scores, labels);
  CHECK(*t.t_group.mean_t == 1.0);
  CHECK(*t.a_group.mean_a() == 1.0);
}

TEST_CASE("sweep endpoints and score file round trip") {
  Adjacency g{{}, {0}, {0, 1}, {}};
  std::vector<Branch> labels{Branch::T, Branch::A, Branch::A, Branch::T};
  auto rows = dependency_sweep(g, labels, 11);
  REQUIRE(rows.size() == 11);
  CHECK(rows.front().r == 0.0);
  CHECK(rows.back().r == 1.0);
  CHECK(rows[5].r == doctest::Approx(0.5));

  auto s = propagate(g, labels, {0.5}).scores;
  auto path = std::filesystem::temp_directory_path() / "bs_scores.csv";
  std::vector<std::string> ids{"a", "b", "c", "d"};
  write_scores(path, ids, s);
  auto back = read_scores(path);
  CHECK(back.ids == ids);
  CHECK(back.scores[0].status == DependencyStatus::Root);
  CHECK(back.scores[2].D_t == doctest::Approx(s[2].D_t).epsilon(1e-6));
}

}
