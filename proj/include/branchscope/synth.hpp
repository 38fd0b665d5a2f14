#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "branchscope/coclus.hpp"
#include "branchscope/ingest.hpp"

namespace branchscope::synth {

/// Parameters of the synthetic publication generator.
///
/// Documents are spread over [first_year, last_year] with geometric growth and
/// an exact per-year T quota interpolated linearly between the two endpoint
/// shares. T papers draw words from one topic vocabulary; A papers from one of
/// several subtopic vocabularies plus a shared A vocabulary; everyone also uses
/// general words and a little of the other branch's vocabulary.
///
/// Each reference of a non-root paper points to an earlier T paper with
/// probability `cite_t_from_t` (T papers) or `cite_t_from_a` (A papers), and to
/// an earlier A paper otherwise. Papers become roots with probability
/// `root_rate`, independent of branch.
struct Params {
  std::size_t documents = 5000;
  std::uint64_t seed = 1;
  int first_year = 2004;
  int last_year = 2017;
  double growth = 1.25;
  double t_share_first = 0.7;
  double t_share_last = 0.3;

  std::size_t t_words = 150;
  std::size_t a_subtopics = 3;
  std::size_t a_subtopic_words = 60;
  std::size_t a_shared_words = 60;
  std::size_t general_words = 100;
  std::size_t title_tokens = 8;
  std::size_t abstract_tokens = 60;
  double own_topic_rate = 0.55;
  double other_branch_rate = 0.10;

  std::vector<std::pair<std::string, double>> t_region_mix{
      {"US", 0.30}, {"CN", 0.20}, {"DE", 0.15}, {"JP", 0.10}, {"GB", 0.10}, {"KR", 0.10}, {"FR", 0.05}};
  std::vector<std::pair<std::string, double>> a_region_mix{
      {"CN", 0.50}, {"US", 0.15}, {"KR", 0.12}, {"IN", 0.10}, {"IR", 0.05}, {"SG", 0.04}, {"JP", 0.04}};
  double collaboration_rate = 0.2;

  double cite_t_from_t = 0.85;
  double cite_t_from_a = 0.35;
  double root_rate = 0.15;
  std::size_t references_per_paper = 8;
  std::size_t external_references = 2;
  std::size_t forced_roots = 20;  // the earliest papers cannot cite anything

  // Additional records that the article filter must drop (reviews, missing DOI, ...).
  double excluded_rate = 0.05;
};

struct Truth {
  std::vector<std::string> ids;  // retained documents, in output order
  std::vector<Branch> branches;
  std::map<int, double> t_share_by_year;  // generator parameter, not the realized ratio
  std::map<std::string, double> t_region_mix;
  std::map<std::string, double> a_region_mix;
  std::string t_anchor_word;  // most frequent T-topic word
  std::vector<std::string> t_vocabulary;
};

struct Corpus {
  std::vector<Record> records;  // includes the records meant to be filtered out
  Truth truth;
};

Corpus generate(const Params& params);

// T share the generator targets in a given year.
double t_share(const Params& params, int year);

/// Closed-form expected mean D_T of defined T papers and of defined A papers.
///
/// Writing c_B for the probability that a reference of a B paper is T and rho
/// for the root rate, the stationary means x_T, x_A solve
///   x_B = r c_B + (1 - r) [c_B (rho + (1 - rho) x_T) + (1 - c_B) (1 - rho) x_A].
std::pair<double, double> expected_group_dependency(const Params& params, double r);

void write_records(std::ostream& out, const std::vector<Record>& records);
void write_truth(const std::filesystem::path& path, const Params& params, const Truth& truth, double r);

}  // namespace branchscope::synth
