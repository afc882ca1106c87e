#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fraudkit/dataset.hpp"
#include "fraudkit/error.hpp"
#include "fraudkit/features.hpp"
#include "fraudkit/graphssl.hpp"
#include "fraudkit/imbalance.hpp"
#include "fraudkit/metrics.hpp"
#include "fraudkit/pipeline.hpp"

namespace py = pybind11;
using namespace fraudkit;

namespace {

// Row-major list of rows into a dataset with features named f0..f{p-1}.
LabeledDataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                            const std::optional<std::vector<double>>& timestamps) {
    LabeledDataset ds;
    for (const auto& r : rows) ds.features.append_row(r);
    ds.labels = labels;
    ds.timestamps = timestamps;
    for (std::size_t j = 0; j < ds.features.cols(); ++j) ds.feature_names.push_back("f" + std::to_string(j));
    ds.validate();
    return ds;
}

py::dict report_dict(const MetricReport& r) {
    py::dict d;
    d["accuracy"] = r.accuracy;
    d["precision"] = r.precision;
    d["recall"] = r.recall;
    d["f1"] = r.f1;
    d["auc"] = r.auc ? py::cast(*r.auc) : py::none();
    d["tp"] = r.counts.tp;
    d["fp"] = r.counts.fp;
    d["fn"] = r.counts.fn;
    d["tn"] = r.counts.tn;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Imbalanced fraud detection: K-SUB, graph p-Laplacian SSL, drift-aware pipeline";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "FraudkitError", PyExc_ValueError);

    m.def("evaluate",
          [](const std::vector<int>& labels, const std::vector<int>& preds, const std::vector<double>& scores) {
              return report_dict(evaluate(labels, preds, scores));
          },
          py::arg("labels"), py::arg("predictions"), py::arg("scores") = std::vector<double>{});
    m.def("f_beta", &f_beta, py::arg("precision"), py::arg("recall"), py::arg("beta"));
    m.def("roc_auc", [](const std::vector<int>& y, const std::vector<double>& s) { return roc_auc(y, s); });

    m.def("undersample_target", &undersample_target);
    m.def("combine_votes", [](const std::vector<double>& scores) {
        const auto v = combine_votes(scores, VoteRule::mean_probability);
        return py::make_tuple(v.label, v.score);
    });

    m.def("cross_validate_ksub",
          [](const std::vector<std::vector<double>>& x, const std::vector<int>& y, int k, int folds, int trees,
             std::uint64_t seed) {
              ForestParams fp;
              fp.n_trees = trees;
              const auto cv = cross_validate_ksub(make_dataset(x, y, std::nullopt), k, folds, fp, seed);
              py::list per_fold;
              for (const auto& f : cv.folds) per_fold.append(report_dict(f));
              py::dict d;
              d["folds"] = per_fold;
              d["mean_f1"] = cv.mean_f1;
              d["std_f1"] = cv.std_f1;
              return d;
          },
          py::arg("x"), py::arg("y"), py::arg("k") = 3, py::arg("folds") = 5, py::arg("trees") = 100,
          py::arg("seed") = 0);

    m.def("knn_graph_edges",
          [](const std::vector<std::vector<double>>& x, std::size_t k, double t) {
              Matrix mx;
              for (const auto& r : x) mx.append_row(r);
              const auto g = build_knn_graph(mx, k, t);
              std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
              for (std::size_t i = 0; i < g.n; ++i)
                  for (std::size_t s = g.row_begin(i); s < g.row_end(i); ++s)
                      if (i < g.neighbors[s]) edges.emplace_back(i, g.neighbors[s], g.weights[s]);
              return edges;
          },
          py::arg("x"), py::arg("k") = 5, py::arg("t") = 0.1);

    m.def("solve_ssl",
          [](std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
             const std::vector<double>& y, double p, double mu, int max_iters, double tol) {
              const auto g = SimilarityGraph::from_edges(n, edges);
              SolverConfig cfg;
              cfg.p = p;
              cfg.mu = mu;
              cfg.max_iters = max_iters;
              cfg.tol = tol;
              const auto r = solve_ssl(g, y, cfg);
              py::dict d;
              d["f"] = r.f;
              d["classes"] = r.classes;
              d["iterations"] = r.iterations;
              d["converged"] = r.converged;
              d["residual"] = r.residual;
              return d;
          },
          py::arg("n"), py::arg("edges"), py::arg("y"), py::arg("p") = 2.0, py::arg("mu") = 1.0,
          py::arg("max_iters") = 1000, py::arg("tol") = 1e-6);

    m.def("aggregate",
          [](const std::vector<double>& group, const std::vector<double>& amount, const std::vector<double>& times,
             const std::vector<double>& windows_hours) {
              LabeledDataset ds;
              ds.feature_names = {"group", "amount"};
              for (std::size_t i = 0; i < group.size(); ++i) {
                  ds.features.append_row(std::vector<double>{group[i], amount.at(i)});
                  ds.labels.push_back(0);
              }
              ds.timestamps = times;
              AggregationSpec spec;
              spec.group_by = "group";
              spec.windows_hours = windows_hours;
              const auto out = aggregate(ds, "amount", spec);
              py::dict cols;
              for (std::size_t j = 2; j < out.n_features(); ++j) {
                  std::vector<double> c(out.size());
                  for (std::size_t i = 0; i < out.size(); ++i) c[i] = out.features(i, j);
                  cols[py::str(out.feature_names[j])] = c;
              }
              return cols;
          },
          py::arg("group"), py::arg("amount"), py::arg("times"),
          py::arg("windows_hours") = std::vector<double>{1, 3, 6, 12, 18, 24, 72, 168});
}
