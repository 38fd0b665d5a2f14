#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "branchscope/coclus.hpp"

namespace branchscope {

enum class DependencyStatus : std::uint8_t { Defined, Root };

// How a root reference (one that cites nothing in the corpus) enters its
// citers' indirect average.
enum class RootMode : std::uint8_t {
  Indicator,  // contributes its own branch: (1, 0) for T, (0, 1) for A
  Skip,       // left out of the average
};

struct DependencyConfig {
  double r = 0.5;
  RootMode root_mode = RootMode::Indicator;
  double tolerance = 1e-10;
  int max_sweeps = 10000;
};

/// Dependency of one paper on theoretical (T) work. The A components are the
/// complements: d_A = 1 - d_T and so on.
struct DependencyScore {
  DependencyStatus status = DependencyStatus::Root;
  double d_t = 0.0;
  std::optional<double> i_t;  // empty for roots, or in Skip mode when every reference is a root
  double D_t = 0.0;

  bool defined() const noexcept { return status == DependencyStatus::Defined; }
  double d_a() const noexcept { return 1.0 - d_t; }
  std::optional<double> i_a() const { return i_t ? std::optional<double>(1.0 - *i_t) : std::nullopt; }
  double D_a() const noexcept { return 1.0 - D_t; }
};

using Adjacency = std::vector<std::vector<std::uint32_t>>;

// Fraction of a paper's references labeled T. Empty when it has none.
std::optional<double> direct_dependency(std::span<const std::uint32_t> references, std::span<const Branch> labels);

struct PropagationResult {
  std::vector<DependencyScore> scores;
  int max_sweeps = 0;           // most sweeps spent on any cyclic component
  double max_residual = 0.0;    // largest final fixed-point residual
  std::size_t cyclic_components = 0;
};

/// D_T = r * d_T + (1 - r) * i_T, where i_T averages the effective D_T of the
/// references. Components of the citation graph are evaluated references-first;
/// within a cycle the values are found by fixed-point iteration (damped by 1/2
/// when r = 0). Throws StageError if a component fails to converge.
PropagationResult propagate(const Adjacency& references, std::span<const Branch> labels,
                            const DependencyConfig& config = {});

// Global Jacobi iteration over all nodes at once, ignoring component structure.
// Slower; kept as an independent route for checking propagate().
PropagationResult propagate_fixed_point(const Adjacency& references, std::span<const Branch> labels,
                                        const DependencyConfig& config = {});

struct GroupMean {
  std::size_t count = 0;
  std::optional<double> mean_t;  // empty when the group has no defined papers
  std::optional<double> mean_a() const {
    return mean_t ? std::optional<double>(1.0 - *mean_t) : std::nullopt;
  }
};

// Means over defined papers of the T group and of the A group.
struct GroupTable {
  GroupMean t_group;
  GroupMean a_group;
  const GroupMean& operator[](Branch b) const { return b == Branch::T ? t_group : a_group; }
};

GroupTable group_average(std::span<const DependencyScore> scores, std::span<const Branch> labels);
std::map<int, GroupTable> yearly_average(std::span<const DependencyScore> scores, std::span<const Branch> labels,
                                         std::span<const std::optional<int>> years);

// Region shared by every affiliation of every author, or empty for papers that
// span regions, lack affiliations, or map to UNKNOWN.
std::optional<std::string> single_region(const Record& document);

std::map<std::string, std::map<int, GroupTable>> region_average(std::span<const DependencyScore> scores,
                                                                std::span<const Branch> labels,
                                                                std::span<const std::optional<int>> years,
                                                                std::span<const std::optional<std::string>> regions);

struct SweepRow {
  double r = 0.0;
  GroupTable table;
};

// r evenly spaced over [0, 1] with `steps` points (steps >= 2).
std::vector<SweepRow> dependency_sweep(const Adjacency& references, std::span<const Branch> labels, int steps,
                                       DependencyConfig config = {});

// `doc_id,status,d_T,i_T,D_T`
void write_scores(const std::filesystem::path& path, const std::vector<std::string>& ids,
                  std::span<const DependencyScore> scores);
struct ScoreFile {
  std::vector<std::string> ids;
  std::vector<DependencyScore> scores;
};
ScoreFile read_scores(const std::filesystem::path& path);

// `group,count,D_T,D_A` for the T and A groups.
void write_group_table(const std::filesystem::path& path, const GroupTable& table);
// `year,group,count,D_T,D_A`
void write_yearly(const std::filesystem::path& path, const std::map<int, GroupTable>& table);
// `region,year,group,count,D_T,D_A`
void write_regional(const std::filesystem::path& path, const std::map<std::string, std::map<int, GroupTable>>& table);
// `r,group,count,D_T,D_A`
void write_sweep(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace branchscope
