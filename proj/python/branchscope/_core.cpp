#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>

#include "branchscope/coclus.hpp"
#include "branchscope/credit.hpp"
#include "branchscope/dependency.hpp"
#include "branchscope/error.hpp"
#include "branchscope/keywords.hpp"
#include "branchscope/report.hpp"
#include "branchscope/stemmer.hpp"
#include "branchscope/synth.hpp"
#include "branchscope/textprep.hpp"

namespace py = pybind11;
using namespace branchscope;

namespace {

py::dict fit_to_dict(int k, const FitResult& r) {
  py::dict d;
  d["k"] = k;
  d["modularity"] = r.partition.modularity;
  d["row_labels"] = r.partition.row_labels;
  d["col_labels"] = r.partition.col_labels;
  d["q_trace"] = r.q_trace;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  return d;
}

ZScoreMode parse_mode(const std::string& mode) {
  if (mode == "stddev") return ZScoreMode::StdDev;
  if (mode == "variance") return ZScoreMode::Variance;
  throw ConfigError("zscore mode must be stddev or variance");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the branchscope core library";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<StageError>(m, "StageError", PyExc_RuntimeError);

  m.def("porter_stem", [](const std::string& w) { return porter_stem(w); }, py::arg("word"));
  m.def(
      "tokenize", [](const std::string& text) { return tokenize(text, TokenPipelineConfig::standard()); },
      py::arg("text"));

  m.def(
      "modularity",
      [](const std::vector<std::vector<double>>& dense, const std::vector<int>& rows, const std::vector<int>& cols) {
        return modularity(DocTermMatrix::from_dense(dense), rows, cols);
      },
      py::arg("matrix"), py::arg("row_labels"), py::arg("col_labels"));

  m.def(
      "fit",
      [](const std::vector<std::vector<double>>& dense, int g, std::uint64_t seed, int restarts, int max_iter,
         double tol) {
        auto mat = DocTermMatrix::from_dense(dense);
        FitResult r;
        {
          py::gil_scoped_release release;
          r = coclus_fit_best(mat, {g, seed, max_iter, tol}, restarts);
        }
        return fit_to_dict(g, r);
      },
      py::arg("matrix"), py::arg("g"), py::arg("seed") = 0, py::arg("restarts") = 1, py::arg("max_iter") = 100,
      py::arg("tol") = 1e-9);

  m.def(
      "scan_k",
      [](const std::vector<std::vector<double>>& dense, int k_min, int k_max, int restarts, std::uint64_t seed) {
        auto mat = DocTermMatrix::from_dense(dense);
        std::vector<ScanEntry> scan;
        {
          py::gil_scoped_release release;
          scan = scan_k(mat, k_min, k_max, restarts, seed);
        }
        py::list out;
        for (const auto& e : scan) out.append(fit_to_dict(e.k, e.best));
        return out;
      },
      py::arg("matrix"), py::arg("k_min") = 2, py::arg("k_max") = 9, py::arg("restarts") = 10, py::arg("seed") = 0);

  m.def(
      "zscore",
      [](double observed, double cluster_size, double p, const std::string& mode) {
        return zscore(observed, cluster_size, p, parse_mode(mode));
      },
      py::arg("observed"), py::arg("cluster_size"), py::arg("global_doc_freq"), py::arg("mode") = "stddev");

  m.def(
      "paper_credit",
      [](const std::vector<std::vector<std::string>>& authors) {
        Record r;
        for (const auto& regions : authors) {
          Author a;
          for (const auto& reg : regions) a.affiliations.push_back({reg, reg});
          r.authors.push_back(std::move(a));
        }
        return paper_credit(r).regions;
      },
      py::arg("author_regions"));

  m.def(
      "propagate",
      [](const Adjacency& refs, const std::vector<std::string>& labels, double r, const std::string& root_mode) {
        std::vector<Branch> b;
        for (const auto& l : labels) b.push_back(parse_branch(l));
        DependencyConfig cfg;
        cfg.r = r;
        if (root_mode == "skip") {
          cfg.root_mode = RootMode::Skip;
        } else if (root_mode != "indicator") {
          throw ConfigError("root_mode must be indicator or skip");
        }
        auto res = propagate(refs, b, cfg);
        std::vector<std::optional<double>> out;
        for (const auto& s : res.scores) out.push_back(s.defined() ? std::optional<double>(s.D_t) : std::nullopt);
        return out;
      },
      py::arg("references"), py::arg("labels"), py::arg("r") = 0.5, py::arg("root_mode") = "indicator");

  m.def(
      "run_pipeline",
      [](const std::map<std::string, std::string>& options) {
        PipelineConfig cfg;
        for (const auto& [k, v] : options) cfg.set(k, v);
        PipelineResult res;
        {
          py::gil_scoped_release release;
          res = run_pipeline(cfg);
        }
        py::dict d;
        d["out_dir"] = res.out_dir;
        d["merge_k"] = res.merge_k;
        d["stable_group"] = res.stable_group;
        d["warnings"] = res.warnings;
        py::list files;
        for (const auto& e : res.manifest) files.append(py::make_tuple(e.path, e.sha256, e.bytes));
        d["manifest"] = files;
        return d;
      },
      py::arg("options"));

  m.def(
      "generate",
      [](const std::filesystem::path& path, std::size_t documents, std::uint64_t seed) {
        synth::Params p;
        p.documents = documents;
        p.seed = seed;
        auto c = synth::generate(p);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write " + path.string());
        synth::write_records(out, c.records);
        py::dict d;
        d["ids"] = c.truth.ids;
        std::vector<std::string> branches;
        for (auto b : c.truth.branches) branches.emplace_back(to_string(b));
        d["branches"] = branches;
        d["t_share_by_year"] = c.truth.t_share_by_year;
        d["t_anchor_word"] = c.truth.t_anchor_word;
        return d;
      },
      py::arg("path"), py::arg("documents") = 5000, py::arg("seed") = 1);
}
