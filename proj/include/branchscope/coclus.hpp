#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "branchscope/textprep.hpp"

namespace branchscope {

/// Joint assignment of matrix rows (documents) and columns (words) to g
/// diagonal co-clusters. Row p and column n belong to the same block iff their
/// labels are equal.
struct CoPartition {
  int g = 0;
  std::vector<int> row_labels;
  std::vector<int> col_labels;
  double modularity = 0.0;

  // Labels in range and every cluster owns at least one row and one column.
  bool valid() const;
  std::vector<std::size_t> row_cluster_sizes() const;
  std::vector<std::size_t> col_cluster_sizes() const;
};

// Reformulated block modularity
//   Q = (1/S) * sum over same-label (p, n) of (a_pn - r_p * c_n / S)
// where r_p, c_n are row and column sums and S the matrix total. Computed per
// cluster in O(nnz + rows + cols). Throws DataError on an all-zero matrix.
double modularity(const DocTermMatrix& matrix, std::span<const int> row_labels, std::span<const int> col_labels);
double modularity(const DocTermMatrix& matrix, const CoPartition& partition);

struct FitOptions {
  int g = 2;
  std::uint64_t seed = 0;
  int max_iter = 100;
  double tol = 1e-9;
};

struct FitResult {
  CoPartition partition;
  // Q after initialization and after every accepted half-step (rows, then columns).
  std::vector<double> q_trace;
  int iterations = 0;
  bool converged = false;
  // Rows with no nonzero entries. They carry label 0 unless an empty-cluster
  // repair moved them.
  std::vector<std::size_t> zero_rows;
};

/// Alternating maximization of block modularity.
///
/// Starting from a seeded random labeling, each iteration reassigns every row to
/// the cluster with the largest modularity contribution given the column
/// labels, then every column given the row labels. Ties go to the lowest
/// cluster index. A half-step that empties a cluster is followed by a repair
/// that moves the worst-fitting row (column) into it; if the repaired labeling
/// scores below the previous one the half-step is rejected and the fit stops,
/// so the trace of Q never decreases.
FitResult coclus_fit(const DocTermMatrix& matrix, const FitOptions& options);

// Best of `restarts` fits. Restart seeds derive from `seed`.
FitResult coclus_fit_best(const DocTermMatrix& matrix, const FitOptions& options, int restarts);

struct ScanEntry {
  int k = 0;
  FitResult best;
};

std::vector<ScanEntry> scan_k(const DocTermMatrix& matrix, int k_min = 2, int k_max = 9, int restarts = 10,
                              std::uint64_t seed = 0, int max_iter = 100, double tol = 1e-9);

struct AgreementStats {
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  std::size_t overlap = 0;
};

// Documents that lie in one of `groups_a` under labeling a and in one of
// `groups_b` under labeling b. Both labelings cover the same documents in the
// same order. Group ids outside [0, g) throw std::invalid_argument.
AgreementStats partition_agreement(std::span<const int> labels_a, int g_a, const std::set<int>& groups_a,
                                   std::span<const int> labels_b, int g_b, const std::set<int>& groups_b);
AgreementStats partition_agreement(const CoPartition& a, const std::set<int>& groups_a, const CoPartition& b,
                                   const std::set<int>& groups_b);

enum class Branch : std::uint8_t { T = 0, A = 1 };

std::string_view to_string(Branch b);
Branch parse_branch(std::string_view s);

struct BranchLabeling {
  std::vector<Branch> documents;
  std::vector<Branch> words;
  std::size_t t_word_count = 0;
  std::size_t a_word_count = 0;

  std::size_t count(Branch b) const;
};

// Stable group -> T, every other group -> A, for rows and columns alike.
BranchLabeling merge_to_branches(const CoPartition& partition, int stable_group);

// `doc_id,label` / `word,label` files.
void write_labels(const std::filesystem::path& path, const char* key_column, const std::vector<std::string>& keys,
                  std::span<const int> labels);
struct LabelFile {
  std::vector<std::string> keys;
  std::vector<int> labels;
  int g = 0;  // max label + 1
};
LabelFile read_labels(const std::filesystem::path& path);

void write_branches(const std::filesystem::path& path, const char* key_column, const std::vector<std::string>& keys,
                    std::span<const Branch> branches);
struct BranchFile {
  std::vector<std::string> keys;
  std::vector<Branch> branches;
};
BranchFile read_branches(const std::filesystem::path& path);

}  // namespace branchscope
