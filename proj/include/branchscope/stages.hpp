#pragma once

// File-level building blocks shared by the pipeline and the standalone CLI
// subcommands, so that both produce byte-identical outputs from the same inputs.

#include <filesystem>
#include <string>
#include <vector>

#include "branchscope/coclus.hpp"
#include "branchscope/csv.hpp"
#include "branchscope/keywords.hpp"
#include "branchscope/textprep.hpp"

namespace branchscope::stages {

// One id per line. Used for the `<matrix>.rows` sidecar listing document ids.
void write_id_list(const std::filesystem::path& path, const std::vector<std::string>& ids);
std::filesystem::path row_ids_path(const std::filesystem::path& matrix_path);

// `scan.csv` (k,Q,iterations,converged) plus `k<k>_docs.csv` / `k<k>_words.csv`.
void write_scan(const std::filesystem::path& dir, const std::vector<ScanEntry>& scan,
                const std::vector<std::string>& doc_ids, const std::vector<std::string>& words);
std::filesystem::path doc_partition_path(const std::filesystem::path& dir, int k);
std::filesystem::path word_partition_path(const std::filesystem::path& dir, int k);

// Overlap of one group of a partition with every group of the other
// partitions: `k,group,stable_size,group_size,overlap`.
csv::Table agreement_table(const std::vector<ScanEntry>& scan, int merge_k, int stable_group);

// Resolves "<id>" or "word:<w>" against a partition. Throws ConfigError.
int resolve_stable_group(const std::string& spec, const CoPartition& partition, const Vocabulary& vocabulary);

// Keywords of the T and A branches.
KeywordTable branch_keywords(const DocTermMatrix& matrix, const Vocabulary& vocabulary,
                             const std::vector<Branch>& branches, double top_quantile, std::size_t n,
                             ZScoreMode mode);
// `cluster,word,reason`
void write_skipped(const std::filesystem::path& path, const KeywordTable& table,
                   const std::vector<std::string>& cluster_names);

}  // namespace branchscope::stages
