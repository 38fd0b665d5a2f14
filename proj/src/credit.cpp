#include "branchscope/credit.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "branchscope/csv.hpp"

namespace branchscope {

PaperCredit paper_credit(const Record& document) {
  PaperCredit out;
  const std::string unknown(kUnknownRegion);
  if (document.authors.empty()) {
    out.regions[unknown] = 1.0;
    out.warning = true;
    return out;
  }
  const double per_author = 1.0 / static_cast<double>(document.authors.size());
  for (const auto& author : document.authors) {
    if (author.affiliations.empty()) {
      out.regions[unknown] += per_author;
      continue;
    }
    const double per_affiliation = per_author / static_cast<double>(author.affiliations.size());
    for (const auto& aff : author.affiliations) {
      out.regions[aff.region.empty() ? unknown : aff.region] += per_affiliation;
    }
  }
  return out;
}

CreditLedger build_ledger(const Corpus& corpus) {
  CreditLedger ledger;
  ledger.documents.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto c = paper_credit(corpus[i]);
    if (c.warning) ledger.warnings.push_back(i);
    ledger.documents.push_back(std::move(c.regions));
  }
  return ledger;
}

RegionShareTable RegionShareTable::filtered(double min_share) const {
  RegionShareTable out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out.rows),
               [min_share](const RegionShareRow& r) { return r.share >= min_share; });
  return out;
}

RegionShareTable aggregate_shares(const Corpus& corpus, const CreditLedger& ledger, std::span<const Branch> branches,
                                  GroupBy group_by) {
  if (ledger.documents.size() != corpus.size()) throw std::invalid_argument("ledger does not cover the corpus");
  if (group_by.branch && branches.size() != corpus.size()) {
    throw std::invalid_argument("branch labeling does not cover the corpus");
  }
  // slice key: (year or sentinel, branch or sentinel)
  using Slice = std::pair<int, int>;
  std::map<Slice, std::map<std::string, double>> sums;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Slice slice{group_by.year ? corpus[i].year.value_or(0) : 0, group_by.branch ? static_cast<int>(branches[i]) : -1};
    auto& bucket = sums[slice];
    for (const auto& [region, fraction] : ledger.documents[i]) bucket[region] += fraction;
  }
  RegionShareTable table;
  for (const auto& [slice, regions] : sums) {
    double total = 0.0;
    for (const auto& [region, credit] : regions) total += credit;
    std::vector<RegionShareRow> rows;
    for (const auto& [region, credit] : regions) {
      RegionShareRow row;
      row.region = region;
      if (group_by.year) row.year = slice.first;
      if (group_by.branch) row.branch = static_cast<Branch>(slice.second);
      row.credit = credit;
      row.share = total > 0.0 ? credit / total : 0.0;
      rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const RegionShareRow& a, const RegionShareRow& b) {
      return a.credit > b.credit;
    });
    table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  }
  return table;
}

std::vector<RegionYearProportion> region_year_proportions(const Corpus& corpus, const CreditLedger& ledger,
                                                          std::span<const Branch> branches) {
  if (ledger.documents.size() != corpus.size() || branches.size() != corpus.size()) {
    throw std::invalid_argument("ledger or labeling does not cover the corpus");
  }
  std::map<std::pair<std::string, int>, std::pair<double, double>> sums;
  std::set<std::string> regions;
  std::optional<int> first, last;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].year) continue;
    const int y = *corpus[i].year;
    first = first ? std::min(*first, y) : y;
    last = last ? std::max(*last, y) : y;
    for (const auto& [region, fraction] : ledger.documents[i]) {
      regions.insert(region);
      auto& s = sums[{region, y}];
      (branches[i] == Branch::T ? s.first : s.second) += fraction;
    }
  }
  std::vector<RegionYearProportion> out;
  if (!first) return out;
  for (const auto& region : regions) {
    for (int y = *first; y <= *last; ++y) {
      RegionYearProportion row{region, y, 0.0, 0.0, std::nullopt};
      if (auto it = sums.find({region, y}); it != sums.end()) {
        row.credit_t = it->second.first;
        row.credit_a = it->second.second;
        const double total = row.credit_t + row.credit_a;
        if (total > 0.0) row.proportions = std::make_pair(row.credit_t / total, row.credit_a / total);
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

void write_ledger(const std::filesystem::path& path, const Corpus& corpus, const CreditLedger& ledger) {
  csv::Table t{{"doc_id", "region", "fraction"}, {}};
  for (std::size_t i = 0; i < ledger.documents.size(); ++i) {
    for (const auto& [region, fraction] : ledger.documents[i]) {
      t.rows.push_back({corpus[i].id, region, csv::format_real(fraction)});
    }
  }
  csv::write_file(path, t);
}

void write_shares(const std::filesystem::path& path, const RegionShareTable& table) {
  csv::Table t{{"region", "year", "branch", "credit", "share"}, {}};
  for (const auto& r : table.rows) {
    t.rows.push_back({r.region, r.year ? std::to_string(*r.year) : "",
                      r.branch ? std::string(to_string(*r.branch)) : "", csv::format_real(r.credit),
                      csv::format_real(r.share)});
  }
  csv::write_file(path, t);
}

void write_region_year(const std::filesystem::path& path, const std::vector<RegionYearProportion>& rows) {
  csv::Table t{{"region", "year", "prop_T", "prop_A", "credit_T", "credit_A", "flag"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({r.region, std::to_string(r.year), r.proportions ? csv::format_real(r.proportions->first) : "",
                      r.proportions ? csv::format_real(r.proportions->second) : "", csv::format_real(r.credit_t),
                      csv::format_real(r.credit_a), r.year < kSparseYearsBefore ? "early" : ""});
  }
  csv::write_file(path, t);
}

}  // namespace branchscope
