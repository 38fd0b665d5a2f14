#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "branchscope/coclus.hpp"
#include "branchscope/ingest.hpp"

namespace branchscope {

using RegionCredit = std::map<std::string, double>;

struct PaperCredit {
  RegionCredit regions;
  bool warning = false;  // no authors: the whole unit went to UNKNOWN
};

// Splits one unit evenly over authors, then each author's share evenly over
// that author's affiliation entries. Repeated regions are not merged before the
// split. Authors without affiliations send their share to UNKNOWN.
PaperCredit paper_credit(const Record& document);

struct CreditLedger {
  std::vector<RegionCredit> documents;  // aligned with corpus order
  std::vector<std::size_t> warnings;    // documents with no authors
};

CreditLedger build_ledger(const Corpus& corpus);

struct GroupBy {
  bool year = false;
  bool branch = false;
};

struct RegionShareRow {
  std::string region;
  std::optional<int> year;
  std::optional<Branch> branch;
  double credit = 0.0;
  double share = 0.0;  // credit / total credit of the (year, branch) slice
};

struct RegionShareTable {
  std::vector<RegionShareRow> rows;  // sorted by year, branch, then credit descending, then region

  // Rows whose share reaches `min_share`; shares are not renormalized.
  RegionShareTable filtered(double min_share) const;
};

// `branches` may be empty when group_by.branch is false.
RegionShareTable aggregate_shares(const Corpus& corpus, const CreditLedger& ledger, std::span<const Branch> branches,
                                  GroupBy group_by);

struct RegionYearProportion {
  std::string region;
  int year = 0;
  double credit_t = 0.0;
  double credit_a = 0.0;
  // (C_T / (C_T + C_A), C_A / (C_T + C_A)); empty when the region has no credit
  // that year, which renders as a gap.
  std::optional<std::pair<double, double>> proportions;
};

// One row per (region, year) over every region present in the ledger and
// every year from the earliest to the latest publication year.
std::vector<RegionYearProportion> region_year_proportions(const Corpus& corpus, const CreditLedger& ledger,
                                                          std::span<const Branch> branches);

inline constexpr int kSparseYearsBefore = 2004;

void write_ledger(const std::filesystem::path& path, const Corpus& corpus, const CreditLedger& ledger);
// `region,year,branch,credit,share`; absent keys are empty fields.
void write_shares(const std::filesystem::path& path, const RegionShareTable& table);
// `region,year,prop_T,prop_A,credit_T,credit_A,flag`; flag is "early" before 2004.
void write_region_year(const std::filesystem::path& path, const std::vector<RegionYearProportion>& rows);

}  // namespace branchscope
