#include "branchscope/coclus.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <random>
#include <thread>

#include "branchscope/csv.hpp"
#include "branchscope/error.hpp"

namespace branchscope {

bool CoPartition::valid() const {
  if (g < 1) return false;
  auto in_range = [this](int l) { return l >= 0 && l < g; };
  if (!std::all_of(row_labels.begin(), row_labels.end(), in_range)) return false;
  if (!std::all_of(col_labels.begin(), col_labels.end(), in_range)) return false;
  auto rs = row_cluster_sizes();
  auto cs = col_cluster_sizes();
  return std::none_of(rs.begin(), rs.end(), [](auto n) { return n == 0; }) &&
         std::none_of(cs.begin(), cs.end(), [](auto n) { return n == 0; });
}

namespace {

std::vector<std::size_t> cluster_sizes(std::span<const int> labels, int g) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(g, 0)), 0);
  for (int l : labels) {
    if (l >= 0 && l < g) ++sizes[static_cast<std::size_t>(l)];
  }
  return sizes;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(seed ^ splitmix64(a)) + b);
}

}  // namespace

std::vector<std::size_t> CoPartition::row_cluster_sizes() const { return cluster_sizes(row_labels, g); }
std::vector<std::size_t> CoPartition::col_cluster_sizes() const { return cluster_sizes(col_labels, g); }

double modularity(const DocTermMatrix& matrix, std::span<const int> row_labels, std::span<const int> col_labels) {
  if (row_labels.size() != matrix.rows() || col_labels.size() != matrix.cols()) {
    throw std::invalid_argument("partition does not match matrix dimensions");
  }
  int g = 0;
  for (int l : row_labels) {
    if (l < 0) throw std::invalid_argument("negative cluster label");
    g = std::max(g, l + 1);
  }
  for (int l : col_labels) {
    if (l < 0) throw std::invalid_argument("negative cluster label");
    g = std::max(g, l + 1);
  }
  const double total = matrix.total();
  if (!(total > 0.0)) throw DataError("modularity is undefined for an all-zero matrix");

  std::vector<double> within(static_cast<std::size_t>(g), 0.0);
  std::vector<double> row_mass(static_cast<std::size_t>(g), 0.0);
  std::vector<double> col_mass(static_cast<std::size_t>(g), 0.0);
  auto col_sums = matrix.col_sums();
  for (std::size_t n = 0; n < matrix.cols(); ++n) col_mass[static_cast<std::size_t>(col_labels[n])] += col_sums[n];
  for (std::size_t p = 0; p < matrix.rows(); ++p) {
    const auto k = row_labels[p];
    auto idx = matrix.row_indices(p);
    auto val = matrix.row_values(p);
    double rs = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      rs += val[i];
      if (col_labels[idx[i]] == k) within[static_cast<std::size_t>(k)] += val[i];
    }
    row_mass[static_cast<std::size_t>(k)] += rs;
  }
  double q = 0.0;
  for (std::size_t k = 0; k < within.size(); ++k) q += within[k] - row_mass[k] * col_mass[k] / total;
  return q / total;
}

double modularity(const DocTermMatrix& matrix, const CoPartition& partition) {
  return modularity(matrix, partition.row_labels, partition.col_labels);
}

namespace {

// One half-step: relabel the rows of `m` (which may be the transpose) given the
// labels of its columns. Returns each row's contribution to its chosen cluster.
std::vector<double> assign_rows(const DocTermMatrix& m, const std::vector<double>& row_sums,
                                const std::vector<double>& col_sums, std::span<const int> col_labels, int g,
                                double total, std::vector<int>& out_labels) {
  std::vector<double> col_mass(static_cast<std::size_t>(g), 0.0);
  for (std::size_t n = 0; n < col_labels.size(); ++n) col_mass[static_cast<std::size_t>(col_labels[n])] += col_sums[n];
  std::vector<double> best_contrib(m.rows());
  std::vector<double> acc(static_cast<std::size_t>(g));
  for (std::size_t p = 0; p < m.rows(); ++p) {
    std::fill(acc.begin(), acc.end(), 0.0);
    auto idx = m.row_indices(p);
    auto val = m.row_values(p);
    for (std::size_t i = 0; i < idx.size(); ++i) acc[static_cast<std::size_t>(col_labels[idx[i]])] += val[i];
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < g; ++k) {
      double c = acc[static_cast<std::size_t>(k)] - row_sums[p] * col_mass[static_cast<std::size_t>(k)] / total;
      if (c > best_value) {
        best_value = c;
        best = k;
      }
    }
    out_labels[p] = best;
    best_contrib[p] = best_value;
  }
  return best_contrib;
}

// Moves the worst-contributing member of a multi-member cluster into each empty
// cluster. Returns false if repair is impossible.
bool repair_empty(std::vector<int>& labels, const std::vector<double>& contrib, int g) {
  auto sizes = cluster_sizes(labels, g);
  for (int k = 0; k < g; ++k) {
    if (sizes[static_cast<std::size_t>(k)] != 0) continue;
    std::size_t pick = labels.size();
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (sizes[static_cast<std::size_t>(labels[i])] < 2) continue;
      if (contrib[i] < worst) {
        worst = contrib[i];
        pick = i;
      }
    }
    if (pick == labels.size()) return false;
    --sizes[static_cast<std::size_t>(labels[pick])];
    labels[pick] = k;
    ++sizes[static_cast<std::size_t>(k)];
  }
  return true;
}

std::size_t count_nonzero(const std::vector<double>& sums) {
  return static_cast<std::size_t>(std::count_if(sums.begin(), sums.end(), [](double s) { return s > 0.0; }));
}

std::vector<int> random_labels(std::size_t n, const std::vector<double>& sums, int g, std::mt19937_64& rng) {
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng() % static_cast<std::uint64_t>(g));
  // Seed every cluster with a distinct nonzero member.
  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < n; ++i) {
    if (sums[i] > 0.0) nonzero.push_back(i);
  }
  for (int k = 0; k < g; ++k) {
    std::size_t j = static_cast<std::size_t>(k) + rng() % (nonzero.size() - static_cast<std::size_t>(k));
    std::swap(nonzero[static_cast<std::size_t>(k)], nonzero[j]);
    labels[nonzero[static_cast<std::size_t>(k)]] = k;
  }
  return labels;
}

FitResult fit_impl(const DocTermMatrix& matrix, const DocTermMatrix& transposed, const std::vector<double>& row_sums,
                   const std::vector<double>& col_sums, double total, const FitOptions& options) {
  const int g = options.g;
  std::mt19937_64 rng(options.seed);
  FitResult result;
  auto& part = result.partition;
  part.g = g;
  part.row_labels = random_labels(matrix.rows(), row_sums, g, rng);
  part.col_labels = random_labels(matrix.cols(), col_sums, g, rng);

  double q = modularity(matrix, part.row_labels, part.col_labels);
  result.q_trace.push_back(q);

  std::vector<int> candidate;
  // Returns true when the half-step was accepted.
  auto half_step = [&](const DocTermMatrix& m, const std::vector<double>& own_sums,
                       const std::vector<double>& other_sums, std::vector<int>& own, const std::vector<int>& other) {
    candidate.assign(own.size(), 0);
    auto contrib = assign_rows(m, own_sums, other_sums, other, g, total, candidate);
    if (!repair_empty(candidate, contrib, g)) return false;
    if (candidate == own) return false;
    std::swap(own, candidate);
    double q_new = modularity(matrix, part.row_labels, part.col_labels);
    if (q_new < q) {
      std::swap(own, candidate);
      return false;
    }
    q = q_new;
    result.q_trace.push_back(q);
    return true;
  };

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const double q_start = q;
    bool rows_moved = half_step(matrix, row_sums, col_sums, part.row_labels, part.col_labels);
    bool cols_moved = half_step(transposed, col_sums, row_sums, part.col_labels, part.row_labels);
    result.iterations = iter + 1;
    if ((!rows_moved && !cols_moved) || q - q_start < options.tol) {
      result.converged = true;
      break;
    }
  }
  part.modularity = modularity(matrix, part.row_labels, part.col_labels);
  for (std::size_t p = 0; p < matrix.rows(); ++p) {
    if (!(row_sums[p] > 0.0)) result.zero_rows.push_back(p);
  }
  return result;
}

void check_fit_preconditions(const DocTermMatrix& matrix, const std::vector<double>& row_sums,
                             const std::vector<double>& col_sums, const FitOptions& options) {
  if (options.g < 2) throw std::invalid_argument("co-clustering needs g >= 2");
  if (options.max_iter < 1) throw std::invalid_argument("max_iter must be positive");
  if (!(matrix.total() > 0.0)) throw DataError("cannot co-cluster an all-zero matrix");
  auto g = static_cast<std::size_t>(options.g);
  if (count_nonzero(row_sums) < g || count_nonzero(col_sums) < g) {
    throw DataError("matrix needs at least " + std::to_string(g) + " nonzero rows and columns for g = " +
                    std::to_string(g));
  }
}

bool better(const FitResult& a, const FitResult& b) { return a.partition.modularity > b.partition.modularity; }

}  // namespace

FitResult coclus_fit(const DocTermMatrix& matrix, const FitOptions& options) {
  auto rs = matrix.row_sums();
  auto cs = matrix.col_sums();
  check_fit_preconditions(matrix, rs, cs, options);
  return fit_impl(matrix, matrix.transposed(), rs, cs, matrix.total(), options);
}

FitResult coclus_fit_best(const DocTermMatrix& matrix, const FitOptions& options, int restarts) {
  if (restarts < 1) throw std::invalid_argument("restarts must be positive");
  auto rs = matrix.row_sums();
  auto cs = matrix.col_sums();
  check_fit_preconditions(matrix, rs, cs, options);
  const auto transposed = matrix.transposed();
  const double total = matrix.total();

  std::vector<FitResult> fits(static_cast<std::size_t>(restarts));
  auto run = [&](std::size_t i) {
    FitOptions o = options;
    o.seed = derive_seed(options.seed, static_cast<std::uint64_t>(options.g), i);
    fits[i] = fit_impl(matrix, transposed, rs, cs, total, o);
  };
  // Restarts are independent; the winner is chosen by index order so the
  // result does not depend on the number of workers.
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, fits.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < fits.size(); ++i) run(i);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < fits.size(); i += workers) run(i);
      }));
    }
    for (auto& j : jobs) j.get();
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < fits.size(); ++i) {
    if (better(fits[i], fits[best])) best = i;
  }
  return std::move(fits[best]);
}

std::vector<ScanEntry> scan_k(const DocTermMatrix& matrix, int k_min, int k_max, int restarts, std::uint64_t seed,
                              int max_iter, double tol) {
  if (k_min < 2) throw std::invalid_argument("k_min must be at least 2");
  if (k_max < k_min) throw std::invalid_argument("k_max must not be below k_min");
  std::vector<ScanEntry> out;
  for (int k = k_min; k <= k_max; ++k) {
    FitOptions o{k, seed, max_iter, tol};
    out.push_back({k, coclus_fit_best(matrix, o, restarts)});
  }
  return out;
}

AgreementStats partition_agreement(std::span<const int> labels_a, int g_a, const std::set<int>& groups_a,
                                   std::span<const int> labels_b, int g_b, const std::set<int>& groups_b) {
  if (labels_a.size() != labels_b.size()) throw std::invalid_argument("partitions cover different document sets");
  auto check = [](const std::set<int>& groups, int g) {
    if (groups.empty()) throw std::invalid_argument("no group selected");
    for (int id : groups) {
      if (id < 0 || id >= g) throw std::invalid_argument("unknown group id " + std::to_string(id));
    }
  };
  check(groups_a, g_a);
  check(groups_b, g_b);
  AgreementStats s;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    bool in_a = groups_a.contains(labels_a[i]);
    bool in_b = groups_b.contains(labels_b[i]);
    s.size_a += in_a;
    s.size_b += in_b;
    s.overlap += in_a && in_b;
  }
  return s;
}

AgreementStats partition_agreement(const CoPartition& a, const std::set<int>& groups_a, const CoPartition& b,
                                   const std::set<int>& groups_b) {
  return partition_agreement(a.row_labels, a.g, groups_a, b.row_labels, b.g, groups_b);
}

std::string_view to_string(Branch b) { return b == Branch::T ? "T" : "A"; }

Branch parse_branch(std::string_view s) {
  if (s == "T") return Branch::T;
  if (s == "A") return Branch::A;
  throw DataError("unknown branch label '" + std::string(s) + "'");
}

std::size_t BranchLabeling::count(Branch b) const {
  return static_cast<std::size_t>(std::count(documents.begin(), documents.end(), b));
}

BranchLabeling merge_to_branches(const CoPartition& partition, int stable_group) {
  if (stable_group < 0 || stable_group >= partition.g) {
    throw std::invalid_argument("stable group " + std::to_string(stable_group) + " outside 0.." +
                                std::to_string(partition.g - 1));
  }
  BranchLabeling out;
  auto to_branch = [stable_group](int l) { return l == stable_group ? Branch::T : Branch::A; };
  std::transform(partition.row_labels.begin(), partition.row_labels.end(), std::back_inserter(out.documents), to_branch);
  std::transform(partition.col_labels.begin(), partition.col_labels.end(), std::back_inserter(out.words), to_branch);
  out.t_word_count = static_cast<std::size_t>(std::count(out.words.begin(), out.words.end(), Branch::T));
  out.a_word_count = out.words.size() - out.t_word_count;
  return out;
}

// ---------------------------------------------------------------------------

void write_labels(const std::filesystem::path& path, const char* key_column, const std::vector<std::string>& keys,
                  std::span<const int> labels) {
  if (keys.size() != labels.size()) throw std::invalid_argument("label count does not match key count");
  csv::Table t{{key_column, "label"}, {}};
  for (std::size_t i = 0; i < keys.size(); ++i) t.rows.push_back({keys[i], std::to_string(labels[i])});
  csv::write_file(path, t);
}

LabelFile read_labels(const std::filesystem::path& path) {
  auto t = csv::read_file(path);
  if (t.header.size() != 2) throw DataError(path.string() + ": expected two columns");
  auto lc = t.column("label");
  std::size_t kc = lc == 0 ? 1 : 0;
  LabelFile out;
  for (const auto& row : t.rows) {
    int l = std::stoi(row[lc]);
    if (l < 0) throw DataError(path.string() + ": negative label");
    out.keys.push_back(row[kc]);
    out.labels.push_back(l);
    out.g = std::max(out.g, l + 1);
  }
  return out;
}

void write_branches(const std::filesystem::path& path, const char* key_column, const std::vector<std::string>& keys,
                    std::span<const Branch> branches) {
  if (keys.size() != branches.size()) throw std::invalid_argument("branch count does not match key count");
  csv::Table t{{key_column, "branch"}, {}};
  for (std::size_t i = 0; i < keys.size(); ++i) t.rows.push_back({keys[i], std::string(to_string(branches[i]))});
  csv::write_file(path, t);
}

BranchFile read_branches(const std::filesystem::path& path) {
  auto t = csv::read_file(path);
  auto bc = t.column("branch");
  std::size_t kc = bc == 0 ? 1 : 0;
  BranchFile out;
  for (const auto& row : t.rows) {
    out.keys.push_back(row[kc]);
    out.branches.push_back(parse_branch(row[bc]));
  }
  return out;
}

}  // namespace branchscope
