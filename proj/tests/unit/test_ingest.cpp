#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "branchscope/error.hpp"
#include "branchscope/ingest.hpp"

using namespace branchscope;

namespace {

std::string line(const std::string& id, const std::string& extra = "") {
  return R"({"id":")" + id + R"(","doi":"10.1/)" + id +
         R"(","title":"t","abstract":"a","year":2010,"doc_type":"Article","authors":[],"references":[])" + extra +
         "}\n";
}

std::filesystem::path temp_dir(const char* name) {
  auto p = std::filesystem::temp_directory_path() / ("bs_ingest_" + std::string(name));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("valid line with all fields") {
  std::istringstream in(
      R"({"id":"W1","doi":"10.1/x","title":"Graphene","abstract":"Spin gap","year":2012,"doc_type":"Article",)"
      R"("authors":[{"name":"Ann","affiliations":[{"raw":"Tsinghua Univ, Beijing, Peoples R China","region":""},"MIT, USA"]}],)"
      R"("references":["W0","10.1/y"]})"
      "\n");
  auto r = parse_records(in);
  REQUIRE(r.errors.empty());
  REQUIRE(r.records.size() == 1);
  const auto& rec = r.records[0];
  CHECK(rec.id == "W1");
  CHECK(rec.doi == "10.1/x");
  CHECK(rec.year == 2012);
  REQUIRE(rec.authors.size() == 1);
  REQUIRE(rec.authors[0].affiliations.size() == 2);
  CHECK(rec.authors[0].affiliations[0].region == "CN");
  CHECK(rec.authors[0].affiliations[1].region == "US");
  CHECK(rec.references == std::vector<std::string>{"W0", "10.1/y"});
}

TEST_CASE("malformed and incomplete lines are reported by line number") {
  std::istringstream in(line("W1") + "{not json\n" + R"({"id":"W3","doc_type":"Article"})" "\n\n" + line("W4"));
  auto r = parse_records(in);
  CHECK(r.records.size() == 2);
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[0].line == 2);
  CHECK(r.errors[1].line == 3);
  CHECK(r.errors[1].message.find("title") != std::string::npos);
}

TEST_CASE("duplicate id is fatal and names the id") {
  std::istringstream in(line("W1") + line("W1"));
  try {
    parse_records(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("W1") != std::string::npos);
  }
}

TEST_CASE("converter hook") {
  std::istringstream in("skip me\nW9\n");
  ParseOptions po;
  po.converter = [](std::string_view raw) -> std::optional<std::string> {
    if (raw == "skip me") return std::nullopt;
    return line(std::string(raw));
  };
  auto r = parse_records(in, po);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].id == "W9");
}

TEST_CASE("region lookup prefers the longest whole-word pattern") {
  RegionMap m({{"china", "CN"}, {"hong kong", "HK"}, {"us", "US"}});
  CHECK(m.lookup("Univ Hong Kong, Hong Kong, China") == "HK");
  CHECK(m.lookup("Dept of Physics, Beijing, China") == "CN");
  CHECK(m.lookup("Houston, USA") == "UNKNOWN");  // "us" is not a whole word here
  CHECK(m.lookup("Lab, US") == "US");
  auto b = RegionMap::bundled();
  CHECK(b.lookup("Natl Univ Singapore, Singapore 117542, Singapore") == "SG");
  CHECK(b.lookup("Univ Manchester, Manchester, Lancs, England") == "GB");
  CHECK(b.lookup("Somewhere") == "UNKNOWN");
}

TEST_CASE("filter keeps research articles with doi and year") {
  std::vector<Record> recs(6);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].id = "R" + std::to_string(i);
    recs[i].doi = "10.1/" + recs[i].id;
    recs[i].year = 2010;
    recs[i].doc_type = "Article";
  }
  recs[1].doc_type = "Review";
  recs[2].doi.reset();
  recs[3].year.reset();
  recs[4].year = 1800;
  recs[5].doc_type = "ARTICLE";
  auto f = filter_corpus(recs);
  CHECK(f.corpus.size() == 2);
  CHECK(f.report.excluded.at(ExclusionReason::DocType) == 1);
  CHECK(f.report.excluded.at(ExclusionReason::MissingDoi) == 1);
  CHECK(f.report.excluded.at(ExclusionReason::MissingYear) == 1);
  CHECK(f.report.excluded.at(ExclusionReason::YearOutOfRange) == 1);
  CHECK(f.corpus.size() + f.report.total_excluded() == recs.size());
  CHECK(f.corpus.find("R5") == 1u);

  std::vector<Record> none{recs[1]};
  CHECK_THROWS_WITH_AS(filter_corpus(none), "no analyzable documents", DataError);
}

TEST_CASE("citation graph resolves ids and dois and deduplicates") {
  std::vector<Record> recs(5);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].id = "P" + std::to_string(i);
    recs[i].doi = "10.1/Doc" + std::to_string(i);
    recs[i].year = 2010;
    recs[i].doc_type = "Article";
  }
  recs[0].references = {"P1", "10.1/doc1", "https://doi.org/10.1/DOC2", "10.9/external", "P0"};
  recs[3].references = {"doi:10.1/doc4", "P4", "P4"};
  Corpus corpus(recs);
  auto g = build_citation_graph(corpus);
  CHECK(g.references(0) == std::vector<std::uint32_t>{1, 2});
  CHECK(g.references(3) == std::vector<std::uint32_t>{4});
  CHECK(g.edge_count() == 3);
  CHECK(g.stats().external == 1);
  CHECK(g.stats().self == 1);

  // Set-based oracle: unique resolvable non-self pairs.
  std::set<std::pair<std::string, std::string>> oracle{{"P0", "P1"}, {"P0", "P2"}, {"P3", "P4"}};
  std::set<std::pair<std::string, std::string>> got;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (auto j : g.references(i)) got.insert({corpus[i].id, corpus[j].id});
  }
  CHECK(got == oracle);

  // Edge count is invariant under record order.
  std::reverse(recs.begin(), recs.end());
  CHECK(build_citation_graph(Corpus(recs)).edge_count() == 3);
}

TEST_CASE("doi normalization") {
  CHECK(normalize_doi(" https://dx.doi.org/10.1000/ABC ") == "10.1000/abc");
  CHECK(normalize_doi("DOI:10.1000/x") == "10.1000/x");
}

TEST_CASE("snapshot, report and graph files round trip") {
  auto dir = temp_dir("roundtrip");
  std::istringstream in(
      R"({"id":"A","doi":"10.1/a","title":"x, \"y\"","abstract":"","year":2011,"doc_type":"Article","authors":[{"name":"N","affiliations":[{"raw":"Paris, France","region":"FR"}]},{"name":"M","affiliations":[]}],"references":["B"]})"
      "\n"
      R"({"id":"B","doi":"10.1/b","title":"z","year":2010,"doc_type":"Article","authors":[],"references":[]})"
      "\n");
  auto parsed = parse_records(in);
  auto f = filter_corpus(parsed.records);
  auto g = build_citation_graph(f.corpus);
  write_corpus_file(dir / "c.jsonl", f.corpus);
  write_graph(dir / "g.csv", f.corpus, g);
  write_filter_report(dir / "r.csv", f.report);
  auto back = read_corpus_file(dir / "c.jsonl");
  CHECK(back.documents() == f.corpus.documents());
  std::vector<std::string> ids{"A", "B"};
  CHECK(read_graph(dir / "g.csv", ids).adjacency() == g.adjacency());
}

}
