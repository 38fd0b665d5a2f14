#include "branchscope/dependency.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "branchscope/csv.hpp"
#include "branchscope/error.hpp"

namespace branchscope {

std::optional<double> direct_dependency(std::span<const std::uint32_t> references, std::span<const Branch> labels) {
  if (references.empty()) return std::nullopt;
  std::size_t t = 0;
  for (auto m : references) t += labels[m] == Branch::T;
  return static_cast<double>(t) / static_cast<double>(references.size());
}

namespace {

void check_inputs(const Adjacency& references, std::span<const Branch> labels, const DependencyConfig& config) {
  if (references.size() != labels.size()) throw std::invalid_argument("labeling does not cover the citation graph");
  if (!(config.r >= 0.0 && config.r <= 1.0)) throw std::invalid_argument("r must lie in [0, 1]");
  for (const auto& refs : references) {
    for (auto m : refs) {
      if (m >= references.size()) throw std::invalid_argument("citation edge outside the graph");
    }
  }
}

// Shared evaluation rule. `value(m)` yields the current D_T of a non-root node.
class Evaluator {
 public:
  Evaluator(const Adjacency& refs, std::span<const Branch> labels, const DependencyConfig& config)
      : refs_(refs), labels_(labels), config_(config) {
    scores_.resize(refs.size());
    for (std::size_t v = 0; v < refs.size(); ++v) {
      auto d = direct_dependency(refs[v], labels);
      if (d) {
        scores_[v].status = DependencyStatus::Defined;
        scores_[v].d_t = *d;
        scores_[v].D_t = *d;
      } else {
        scores_[v].status = DependencyStatus::Root;
      }
    }
  }

  bool is_root(std::size_t v) const { return !scores_[v].defined(); }

  // Indirect term and combined value of v given the D_T values in `current`.
  std::pair<std::optional<double>, double> evaluate(std::size_t v, const std::vector<double>& current) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (auto m : refs_[v]) {
      if (is_root(m)) {
        if (config_.root_mode == RootMode::Skip) continue;
        sum += labels_[m] == Branch::T ? 1.0 : 0.0;
      } else {
        sum += current[m];
      }
      ++n;
    }
    const double d = scores_[v].d_t;
    if (n == 0) return {std::nullopt, d};
    const double i = sum / static_cast<double>(n);
    return {i, config_.r * d + (1.0 - config_.r) * i};
  }

  double damping() const { return config_.r > 0.0 ? 1.0 : 0.5; }

  std::vector<DependencyScore>& scores() { return scores_; }

 private:
  const Adjacency& refs_;
  std::span<const Branch> labels_;
  const DependencyConfig& config_;
  std::vector<DependencyScore> scores_;
};

// Tarjan's algorithm, iterative. Components come out cited-before-citing.
std::vector<std::vector<std::uint32_t>> strongly_connected_components(const Adjacency& g) {
  const std::size_t n = g.size();
  constexpr std::uint32_t kUnvisited = UINT32_MAX;
  std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::uint32_t> stack;
  std::vector<std::pair<std::uint32_t, std::size_t>> call;  // node, next edge
  std::vector<std::vector<std::uint32_t>> out;
  std::uint32_t counter = 0;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, edge] = call.back();
      if (edge < g[v].size()) {
        std::uint32_t w = g[v][edge++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::uint32_t node = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[node]);
      if (low[node] == index[node]) {
        std::vector<std::uint32_t> component;
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component.push_back(w);
        } while (w != node);
        std::sort(component.begin(), component.end());
        out.push_back(std::move(component));
      }
    }
  }
  return out;
}

void store(DependencyScore& s, const std::pair<std::optional<double>, double>& value) {
  s.i_t = value.first;
  s.D_t = value.second;
}

}  // namespace

PropagationResult propagate(const Adjacency& references, std::span<const Branch> labels,
                            const DependencyConfig& config) {
  check_inputs(references, labels, config);
  Evaluator eval(references, labels, config);
  auto& scores = eval.scores();
  std::vector<double> value(references.size(), 0.0);
  for (std::size_t v = 0; v < scores.size(); ++v) value[v] = scores[v].D_t;

  PropagationResult result;
  const double omega = eval.damping();
  std::vector<double> next;
  for (const auto& component : strongly_connected_components(references)) {
    if (component.size() == 1) {
      auto v = component.front();
      if (eval.is_root(v)) continue;
      auto ev = eval.evaluate(v, value);
      store(scores[v], ev);
      value[v] = ev.second;
      continue;
    }
    ++result.cyclic_components;
    next.resize(component.size());
    double residual = 0.0;
    int sweep = 0;
    for (; sweep < config.max_sweeps; ++sweep) {
      residual = 0.0;
      for (std::size_t j = 0; j < component.size(); ++j) {
        next[j] = eval.evaluate(component[j], value).second;
        residual = std::max(residual, std::abs(next[j] - value[component[j]]));
      }
      if (residual < config.tolerance) break;
      for (std::size_t j = 0; j < component.size(); ++j) {
        auto v = component[j];
        value[v] = omega * next[j] + (1.0 - omega) * value[v];
      }
    }
    if (residual >= config.tolerance) {
      std::string nodes;
      for (std::size_t j = 0; j < component.size() && j < 20; ++j) nodes += (j ? "," : "") + std::to_string(component[j]);
      throw StageError("dependency", "cycle {" + nodes + "} did not converge within " +
                                         std::to_string(config.max_sweeps) + " sweeps (residual " +
                                         std::to_string(residual) + ")");
    }
    for (auto v : component) store(scores[v], eval.evaluate(v, value));
    for (auto v : component) value[v] = scores[v].D_t;
    result.max_sweeps = std::max(result.max_sweeps, sweep + 1);
    result.max_residual = std::max(result.max_residual, residual);
  }
  result.scores = std::move(scores);
  return result;
}

PropagationResult propagate_fixed_point(const Adjacency& references, std::span<const Branch> labels,
                                        const DependencyConfig& config) {
  check_inputs(references, labels, config);
  Evaluator eval(references, labels, config);
  auto& scores = eval.scores();
  const std::size_t n = references.size();
  std::vector<double> value(n), next(n);
  for (std::size_t v = 0; v < n; ++v) value[v] = scores[v].D_t;
  const double omega = eval.damping();
  PropagationResult result;
  double residual = 0.0;
  int sweep = 0;
  for (; sweep < config.max_sweeps; ++sweep) {
    residual = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (eval.is_root(v)) continue;
      next[v] = eval.evaluate(v, value).second;
      residual = std::max(residual, std::abs(next[v] - value[v]));
    }
    if (residual < config.tolerance) break;
    for (std::size_t v = 0; v < n; ++v) {
      if (!eval.is_root(v)) value[v] = omega * next[v] + (1.0 - omega) * value[v];
    }
  }
  if (residual >= config.tolerance) {
    throw StageError("dependency", "global fixed-point iteration did not converge");
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!eval.is_root(v)) store(scores[v], eval.evaluate(v, value));
  }
  result.max_sweeps = sweep + 1;
  result.max_residual = residual;
  result.scores = std::move(scores);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

struct Accumulator {
  double sum_t = 0.0;
  std::size_t count = 0;

  GroupMean mean() const {
    GroupMean m;
    m.count = count;
    if (count) m.mean_t = sum_t / static_cast<double>(count);
    return m;
  }
};

struct GroupAccumulator {
  Accumulator t, a;
  void add(Branch b, const DependencyScore& s) {
    auto& acc = b == Branch::T ? t : a;
    acc.sum_t += s.D_t;
    ++acc.count;
  }
  GroupTable table() const { return {t.mean(), a.mean()}; }
};

}  // namespace

GroupTable group_average(std::span<const DependencyScore> scores, std::span<const Branch> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  GroupAccumulator acc;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].defined()) acc.add(labels[i], scores[i]);
  }
  return acc.table();
}

std::map<int, GroupTable> yearly_average(std::span<const DependencyScore> scores, std::span<const Branch> labels,
                                         std::span<const std::optional<int>> years) {
  if (scores.size() != labels.size() || scores.size() != years.size()) {
    throw std::invalid_argument("scores, labels and years differ in length");
  }
  std::map<int, GroupAccumulator> acc;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (years[i]) {
      auto& a = acc[*years[i]];  // years with only root papers still get a (gap) row
      if (scores[i].defined()) a.add(labels[i], scores[i]);
    }
  }
  std::map<int, GroupTable> out;
  for (const auto& [year, a] : acc) out[year] = a.table();
  return out;
}

std::optional<std::string> single_region(const Record& document) {
  std::optional<std::string> region;
  if (document.authors.empty()) return std::nullopt;
  for (const auto& author : document.authors) {
    if (author.affiliations.empty()) return std::nullopt;
    for (const auto& aff : author.affiliations) {
      if (aff.region.empty() || aff.region == kUnknownRegion) return std::nullopt;
      if (region && *region != aff.region) return std::nullopt;
      region = aff.region;
    }
  }
  return region;
}

std::map<std::string, std::map<int, GroupTable>> region_average(std::span<const DependencyScore> scores,
                                                                std::span<const Branch> labels,
                                                                std::span<const std::optional<int>> years,
                                                                std::span<const std::optional<std::string>> regions) {
  if (scores.size() != labels.size() || scores.size() != years.size() || scores.size() != regions.size()) {
    throw std::invalid_argument("scores, labels, years and regions differ in length");
  }
  std::map<std::string, std::map<int, GroupAccumulator>> acc;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!regions[i] || !years[i]) continue;
    auto& a = acc[*regions[i]][*years[i]];
    if (scores[i].defined()) a.add(labels[i], scores[i]);
  }
  std::map<std::string, std::map<int, GroupTable>> out;
  for (const auto& [region, by_year] : acc) {
    for (const auto& [year, a] : by_year) out[region][year] = a.table();
  }
  return out;
}

std::vector<SweepRow> dependency_sweep(const Adjacency& references, std::span<const Branch> labels, int steps,
                                       DependencyConfig config) {
  if (steps < 2) throw std::invalid_argument("a sweep needs at least two steps");
  std::vector<SweepRow> rows;
  for (int s = 0; s < steps; ++s) {
    config.r = static_cast<double>(s) / static_cast<double>(steps - 1);
    auto result = propagate(references, labels, config);
    rows.push_back({config.r, group_average(result.scores, labels)});
  }
  return rows;
}

// ---------------------------------------------------------------------------

namespace {

std::string opt_real(const std::optional<double>& v) { return v ? csv::format_real(*v) : ""; }

void append_group_rows(std::vector<std::vector<std::string>>& rows, std::vector<std::string> prefix,
                       const GroupTable& table) {
  for (Branch b : {Branch::T, Branch::A}) {
    const auto& m = table[b];
    auto row = prefix;
    row.push_back(std::string(to_string(b)));
    row.push_back(std::to_string(m.count));
    row.push_back(opt_real(m.mean_t));
    row.push_back(opt_real(m.mean_a()));
    rows.push_back(std::move(row));
  }
}

}  // namespace

void write_scores(const std::filesystem::path& path, const std::vector<std::string>& ids,
                  std::span<const DependencyScore> scores) {
  if (ids.size() != scores.size()) throw std::invalid_argument("ids and scores differ in length");
  csv::Table t{{"doc_id", "status", "d_T", "i_T", "D_T"}, {}};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& s = scores[i];
    if (s.defined()) {
      t.rows.push_back({ids[i], "DEFINED", csv::format_real(s.d_t), opt_real(s.i_t), csv::format_real(s.D_t)});
    } else {
      t.rows.push_back({ids[i], "ROOT", "", "", ""});
    }
  }
  csv::write_file(path, t);
}

ScoreFile read_scores(const std::filesystem::path& path) {
  auto t = csv::read_file(path);
  auto id = t.column("doc_id"), st = t.column("status"), d = t.column("d_T"), i = t.column("i_T"),
       D = t.column("D_T");
  ScoreFile out;
  for (const auto& row : t.rows) {
    DependencyScore s;
    if (row[st] == "DEFINED") {
      s.status = DependencyStatus::Defined;
      s.d_t = std::stod(row[d]);
      if (!row[i].empty()) s.i_t = std::stod(row[i]);
      s.D_t = std::stod(row[D]);
    } else if (row[st] != "ROOT") {
      throw DataError("unknown dependency status '" + row[st] + "'");
    }
    out.ids.push_back(row[id]);
    out.scores.push_back(s);
  }
  return out;
}

void write_group_table(const std::filesystem::path& path, const GroupTable& table) {
  csv::Table t{{"group", "count", "D_T", "D_A"}, {}};
  append_group_rows(t.rows, {}, table);
  csv::write_file(path, t);
}

void write_yearly(const std::filesystem::path& path, const std::map<int, GroupTable>& table) {
  csv::Table t{{"year", "group", "count", "D_T", "D_A"}, {}};
  for (const auto& [year, g] : table) append_group_rows(t.rows, {std::to_string(year)}, g);
  csv::write_file(path, t);
}

void write_regional(const std::filesystem::path& path, const std::map<std::string, std::map<int, GroupTable>>& table) {
  csv::Table t{{"region", "year", "group", "count", "D_T", "D_A"}, {}};
  for (const auto& [region, by_year] : table) {
    for (const auto& [year, g] : by_year) append_group_rows(t.rows, {region, std::to_string(year)}, g);
  }
  csv::write_file(path, t);
}

void write_sweep(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  csv::Table t{{"r", "group", "count", "D_T", "D_A"}, {}};
  for (const auto& row : rows) append_group_rows(t.rows, {csv::format_real(row.r)}, row.table);
  csv::write_file(path, t);
}

}  // namespace branchscope
