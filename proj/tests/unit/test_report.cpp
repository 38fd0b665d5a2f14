#include <doctest.h>

#include <fstream>
#include <regex>

#include "branchscope/error.hpp"
#include "branchscope/report.hpp"
#include "branchscope/synth.hpp"

using namespace branchscope;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("bs_report_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

fs::path small_corpus(const fs::path& dir) {
  synth::Params p;
  p.documents = 600;
  p.seed = 3;
  auto corpus = synth::generate(p);
  auto path = dir / "corpus.jsonl";
  std::ofstream out(path, std::ios::binary);
  synth::write_records(out, corpus.records);
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("config file, overrides and validation") {
  auto dir = fresh_dir("config");
  {
    std::ofstream out(dir / "run.conf");
    out << "# comment\ninput = a.jsonl\nout_dir = out\nk-max = 6\nroot_mode = skip\nmerge_k = 4\n";
  }
  auto c = PipelineConfig::from_file(dir / "run.conf");
  CHECK(c.k_max == 6);
  CHECK(c.root_mode == RootMode::Skip);
  CHECK(c.merge_k == 4);
  c.validate();
  c.set("seed", "42");
  CHECK(c.seed == 42u);
  CHECK_THROWS_AS(c.set("colour", "red"), ConfigError);
  CHECK_THROWS_AS(c.set("r", "half"), ConfigError);

  auto bad = c;
  bad.k_min = 7;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.r = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.out_dir = "a.jsonl";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("yearly trend") {
  std::vector<std::optional<int>> years;
  std::vector<Branch> branches;
  for (int i = 0; i < 100; ++i) {
    years.push_back(2010);
    branches.push_back(i < 30 ? Branch::T : Branch::A);
  }
  auto t = yearly_trend(years, branches);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].proportion == doctest::Approx(0.3));
  CHECK(t.rows[1].proportion == doctest::Approx(0.7));

  // Three-year hand tally, with an early year cut off by the default start.
  std::vector<std::optional<int>> y{2003, 2004, 2004, 2004, 2005, 2006, 2006, std::nullopt};
  std::vector<Branch> b{Branch::T, Branch::T, Branch::A, Branch::T, Branch::A, Branch::A, Branch::T, Branch::T};
  auto h = yearly_trend(y, b);
  REQUIRE(h.rows.size() == 6);
  CHECK(h.rows[0].year == 2004);
  CHECK(h.rows[0].count == 2);
  CHECK(h.rows[0].proportion == doctest::Approx(2.0 / 3.0));
  CHECK(h.rows[2].proportion == 0.0);
  CHECK(h.rows[3].proportion == 1.0);
  for (std::size_t i = 0; i < h.rows.size(); i += 2) CHECK(h.rows[i].proportion + h.rows[i + 1].proportion == 1.0);
  CHECK(yearly_trend(y, b, 2004, 2004).rows.size() == 2);
}

TEST_CASE("trend chart has one line per branch") {
  std::vector<std::optional<int>> y{2004, 2004, 2005, 2005, 2006};
  std::vector<Branch> b{Branch::T, Branch::A, Branch::T, Branch::T, Branch::A};
  auto svg = render_chart(to_table(yearly_trend(y, b)), {ChartSpec::Kind::Line, "t", "year", "proportion", "branch"});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "<polyline") == 2);
  CHECK(count(svg, "data-series=") == 2);
}

TEST_CASE("missing year breaks the line") {
  csv::Table t{{"region", "year", "prop_T"},
               {{"CN", "2004", "0.5"}, {"CN", "2005", ""}, {"CN", "2006", "0.4"}, {"CN", "2007", "0.3"},
                {"US", "2004", "0.7"}, {"US", "2005", "0.6"}, {"US", "2007", "0.5"}}};
  auto svg = render_chart(t, {ChartSpec::Kind::Line, "ry", "year", "prop_T", "region"});
  // CN: 2004 alone, then 2006-2007; US: 2004-2005, then 2007 alone (2006 missing).
  CHECK(count(svg, "<polyline") == 2);
  CHECK(count(svg, "<circle") == 6);
}

TEST_CASE("empty table renders axes only; unknown columns are fatal") {
  csv::Table t{{"year", "value"}, {}};
  auto svg = render_chart(t, {ChartSpec::Kind::Line, "empty", "year", "value"});
  CHECK(svg.find("class=\"axes\"") != std::string::npos);
  CHECK(count(svg, "<polyline") == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK_THROWS_AS(render_chart(t, {ChartSpec::Kind::Line, "x", "year", "nope"}), ConfigError);
  CHECK_NOTHROW(render_chart(t, {ChartSpec::Kind::Bar, "b", "year", "value"}));
}

TEST_CASE("sha256 of a known string") {
  auto dir = fresh_dir("sha");
  std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
  CHECK(sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::create_directories(dir / "sub");
  std::ofstream(dir / "sub" / "b.txt", std::ios::binary) << "";
  auto m = build_manifest(dir);
  REQUIRE(m.size() == 2);
  CHECK(m[0].path == "abc.txt");
  CHECK(m[1].path == "sub/b.txt");
  CHECK(m[1].bytes == 0);
}

TEST_CASE("pipeline writes every artifact and a matching manifest") {
  auto dir = fresh_dir("pipeline");
  PipelineConfig c;
  c.input = small_corpus(dir);
  c.out_dir = dir / "out";
  c.k_max = 4;
  c.restarts = 3;
  c.stable_group = "0";
  auto res = run_pipeline(c);
  CHECK(fs::exists(dir / "out" / "manifest.csv"));
  CHECK_FALSE(fs::exists(dir / "out.partial"));
  CHECK_FALSE(fs::exists(dir / "out.lock"));
  for (const char* f : {"ingest/corpus.jsonl", "textprep/matrix.csv", "cluster/scan.csv", "branches/doc_branches.csv",
                        "keywords/keywords.csv", "credit/shares.csv", "trend/yearly.csv", "dependency/groups.csv",
                        "charts/yearly_trend.svg"}) {
    CHECK_MESSAGE(fs::exists(dir / "out" / f), f);
  }
  auto manifest = csv::read_file(dir / "out" / "manifest.csv");
  CHECK(manifest.rows.size() == res.manifest.size());
  for (const auto& row : manifest.rows) CHECK(sha256_file(dir / "out" / row[0]) == row[1]);

  // Every CSV survives a parse/write cycle unchanged.
  for (const auto& e : fs::recursive_directory_iterator(dir / "out")) {
    if (e.path().extension() != ".csv") continue;
    auto t = csv::read_file(e.path());
    auto copy = dir / "copy.csv";
    csv::write_file(copy, t);
    CHECK_MESSAGE(slurp(copy) == slurp(e.path()), e.path().string());
  }

  SUBCASE("rerun is byte identical") {
    c.out_dir = dir / "again";
    run_pipeline(c);
    CHECK(slurp(dir / "again" / "manifest.csv") == slurp(dir / "out" / "manifest.csv"));
  }
  SUBCASE("prompt decides the stable group") {
    c.out_dir = dir / "prompted";
    c.stable_group.clear();
    int calls = 0;
    auto r = run_pipeline(c, [&](const std::vector<ScanEntry>& scan, int k, const std::vector<std::string>&) {
      ++calls;
      CHECK(scan.size() == 3);
      CHECK(k >= 2);
      return 1;
    });
    CHECK(calls == 1);
    CHECK(r.stable_group == 1);
  }
  SUBCASE("word-selected stable group") {
    c.out_dir = dir / "byword";
    c.stable_group = "word:doesnotexist";
    CHECK_THROWS_AS(run_pipeline(c), ConfigError);
    CHECK_FALSE(fs::exists(dir / "byword.partial"));
  }
}

TEST_CASE("pipeline errors") {
  auto dir = fresh_dir("errors");
  PipelineConfig c;
  c.input = small_corpus(dir);
  c.out_dir = dir / "out";
  c.stable_group = "0";
  c.k_min = 5;
  c.k_max = 3;
  CHECK_THROWS_AS(run_pipeline(c), ConfigError);

  c.k_min = 2;
  c.k_max = 3;
  c.restarts = 1;
  std::ofstream(dir / "out.lock") << "1";
  CHECK_THROWS_AS(run_pipeline(c), StageError);
  fs::remove(dir / "out.lock");

  c.input = dir / "missing.jsonl";
  CHECK_THROWS_AS(run_pipeline(c), ConfigError);

  // Everything filtered out: data error naming the stage, no partial output left.
  std::ofstream(dir / "reviews.jsonl")
      << R"({"id":"x","doi":"10.1/x","title":"t","year":2010,"doc_type":"Review"})" << "\n";
  c.input = dir / "reviews.jsonl";
  try {
    run_pipeline(c);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).rfind("ingest:", 0) == 0);
  }
  CHECK_FALSE(fs::exists(dir / "out.partial"));
  CHECK_FALSE(fs::exists(dir / "out"));
}

}
