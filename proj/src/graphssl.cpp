#include "fraudkit/graphssl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fraudkit/error.hpp"

namespace fraudkit {

namespace {

void require_vertex_fn(const SimilarityGraph& g, std::span<const double> f) {
    require(f.size() == g.n, ErrorKind::dimension_mismatch,
            "vertex function has " + std::to_string(f.size()) + " entries, graph has " +
                std::to_string(g.n) + " nodes");
}

void require_edge_fn(const SimilarityGraph& g, std::span<const double> F) {
    require(F.size() == g.slots(), ErrorKind::dimension_mismatch,
            "edge function has " + std::to_string(F.size()) + " entries, graph has " +
                std::to_string(g.slots()) + " directed edges");
}

} // namespace

SimilarityGraph SimilarityGraph::from_edges(
    std::size_t n, std::span<const std::tuple<std::size_t, std::size_t, double>> edges) {
    std::map<std::pair<std::size_t, std::size_t>, double> unique;
    for (const auto& [a, b, w] : edges) {
        require(a < n && b < n, ErrorKind::invalid_argument, "edge endpoint out of range");
        require(a != b, ErrorKind::invalid_argument, "self loops are not allowed");
        require(std::isfinite(w) && w >= 0.0, ErrorKind::invalid_argument,
                "edge weights must be finite and non-negative");
        unique[{std::min(a, b), std::max(a, b)}] = w;
    }

    SimilarityGraph g;
    g.n = n;
    std::vector<std::size_t> deg(n, 0);
    for (const auto& [key, w] : unique)
        if (w > 0.0) {
            ++deg[key.first];
            ++deg[key.second];
        }
    g.offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] = g.offsets[i] + deg[i];
    g.neighbors.resize(g.offsets[n]);
    g.weights.resize(g.offsets[n]);
    g.reverse.resize(g.offsets[n]);

    // keys arrive ordered by (lo, hi): row i first receives its lower
    // neighbours (as hi), then its higher ones (as lo), so rows come out sorted
    std::vector<std::size_t> fill(g.offsets.begin(), g.offsets.end() - 1);
    for (const auto& [key, w] : unique) {
        if (w <= 0.0) continue;
        const auto [a, b] = key;
        const std::size_t sa = fill[a]++;
        const std::size_t sb = fill[b]++;
        g.neighbors[sa] = b;
        g.neighbors[sb] = a;
        g.weights[sa] = w;
        g.weights[sb] = w;
        g.reverse[sa] = sb;
        g.reverse[sb] = sa;
    }
    return g;
}

double SimilarityGraph::weight(std::size_t i, std::size_t j) const {
    require(i < n && j < n, ErrorKind::invalid_argument, "node index out of range");
    const auto first = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[i]);
    const auto last = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return weights[static_cast<std::size_t>(it - neighbors.begin())];
}

void SimilarityGraph::validate() const {
    require(offsets.size() == n + 1 && offsets.front() == 0 && offsets.back() == neighbors.size(),
            ErrorKind::invalid_argument, "malformed CSR offsets");
    require(weights.size() == neighbors.size() && reverse.size() == neighbors.size(),
            ErrorKind::invalid_argument, "malformed CSR arrays");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t s = offsets[i]; s < offsets[i + 1]; ++s) {
            const std::size_t j = neighbors[s];
            require(j < n && j != i, ErrorKind::invalid_argument, "bad neighbour index");
            require(weights[s] > 0.0 && std::isfinite(weights[s]), ErrorKind::invalid_argument,
                    "stored edge weights must be positive");
            const std::size_t r = reverse[s];
            require(r >= offsets[j] && r < offsets[j + 1] && neighbors[r] == i &&
                        reverse[r] == s && weights[r] == weights[s],
                    ErrorKind::invalid_argument, "graph is not symmetric");
        }
}

SimilarityGraph build_knn_graph(const Matrix& x, std::size_t k, double t) {
    const std::size_t n = x.rows();
    require(k >= 1, ErrorKind::invalid_argument, "k must be >= 1");
    require(n >= k + 1, ErrorKind::insufficient_data,
            "kNN graph with k=" + std::to_string(k) + " needs at least " + std::to_string(k + 1) +
                " points, got " + std::to_string(n));
    require(t > 0.0 && std::isfinite(t), ErrorKind::invalid_argument, "t must be positive");

    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    edges.reserve(n * k);
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto xj = x.row(j);
        std::size_t m = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            const auto xi = x.row(i);
            double s = 0.0;
            for (std::size_t d = 0; d < x.cols(); ++d) {
                const double diff = xi[d] - xj[d];
                s += diff * diff;
            }
            dist[m++] = {s, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                          dist.begin() + static_cast<std::ptrdiff_t>(m));
        for (std::size_t r = 0; r < k; ++r) {
            const double w = std::exp(-std::sqrt(dist[r].first) / t);
            edges.emplace_back(dist[r].second, j, w);
        }
    }
    // the same pair can be proposed from both ends; both carry the same
    // weight, so from_edges keeping one of them is enough
    return SimilarityGraph::from_edges(n, edges);
}

std::vector<double> degree(const SimilarityGraph& g) {
    std::vector<double> d(g.n, 0.0);
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t s = g.row_begin(i); s < g.row_end(i); ++s) d[i] += g.weights[s];
    return d;
}

EdgeFunction gradient(const SimilarityGraph& g, std::span<const double> f) {
    require_vertex_fn(g, f);
    EdgeFunction out(g.slots());
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t s = g.row_begin(i); s < g.row_end(i); ++s)
            out[s] = std::sqrt(g.weights[s]) * (f[g.neighbors[s]] - f[i]);
    return out;
}

std::vector<double> divergence(const SimilarityGraph& g, std::span<const double> F) {
    require_edge_fn(g, F);
    std::vector<double> out(g.n, 0.0);
    for (std::size_t j = 0; j < g.n; ++j)
        for (std::size_t s = g.row_begin(j); s < g.row_end(j); ++s) {
            // s is the slot j -> i, so F[s] = F_ji and F[reverse] = F_ij
            out[j] += std::sqrt(g.weights[s]) * (F[s] - F[g.reverse[s]]);
        }
    return out;
}

std::vector<double> laplacian(const SimilarityGraph& g, std::span<const double> f) {
    require_vertex_fn(g, f);
    std::vector<double> out(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
        double d = 0.0, nb = 0.0;
        for (std::size_t s = g.row_begin(j); s < g.row_end(j); ++s) {
            d += g.weights[s];
            nb += g.weights[s] * f[g.neighbors[s]];
        }
        out[j] = d * f[j] - nb;
    }
    return out;
}

std::vector<double> local_variation(const SimilarityGraph& g, std::span<const double> f,
                                    double epsilon) {
    require_vertex_fn(g, f);
    require(epsilon > 0.0, ErrorKind::invalid_argument, "epsilon must be positive");
    std::vector<double> out(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        double s = 0.0;
        for (std::size_t k = g.row_begin(i); k < g.row_end(i); ++k) {
            const double diff = f[g.neighbors[k]] - f[i];
            s += g.weights[k] * diff * diff;
        }
        out[i] = std::sqrt(s + epsilon);
    }
    return out;
}

std::vector<double> curvature(const SimilarityGraph& g, std::span<const double> f, double epsilon) {
    const auto lv = local_variation(g, f, epsilon);
    std::vector<double> out(g.n, 0.0);
    for (std::size_t j = 0; j < g.n; ++j)
        for (std::size_t s = g.row_begin(j); s < g.row_end(j); ++s) {
            const std::size_t i = g.neighbors[s];
            out[j] += 0.5 * g.weights[s] * (1.0 / lv[i] + 1.0 / lv[j]) * (f[j] - f[i]);
        }
    return out;
}

std::vector<double> p_laplacian(const SimilarityGraph& g, std::span<const double> f, double p,
                                double epsilon) {
    require(p >= 1.0 && std::isfinite(p), ErrorKind::invalid_argument, "p must be >= 1");
    const auto lv = local_variation(g, f, epsilon);
    std::vector<double> pw(g.n);
    for (std::size_t i = 0; i < g.n; ++i) pw[i] = std::pow(lv[i], p - 2.0);
    std::vector<double> out(g.n, 0.0);
    for (std::size_t j = 0; j < g.n; ++j)
        for (std::size_t s = g.row_begin(j); s < g.row_end(j); ++s) {
            const std::size_t i = g.neighbors[s];
            out[j] += 0.5 * g.weights[s] * (pw[i] + pw[j]) * (f[j] - f[i]);
        }
    return out;
}

double vertex_inner(std::span<const double> f, std::span<const double> h) {
    require(f.size() == h.size(), ErrorKind::dimension_mismatch, "vertex functions differ in size");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * h[i];
    return s;
}

double edge_inner(const SimilarityGraph& g, std::span<const double> a, std::span<const double> b) {
    require_edge_fn(g, a);
    require_edge_fn(g, b);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double laplacian_energy(const SimilarityGraph& g, std::span<const double> f) {
    const auto lf = laplacian(g, f);
    return vertex_inner(lf, f);
}

double total_variation(const SimilarityGraph& g, std::span<const double> f, double epsilon) {
    const auto lv = local_variation(g, f, epsilon);
    return std::accumulate(lv.begin(), lv.end(), 0.0);
}

double p_smoothness(const SimilarityGraph& g, std::span<const double> f, double p, double epsilon) {
    require(p >= 1.0 && std::isfinite(p), ErrorKind::invalid_argument, "p must be >= 1");
    const auto lv = local_variation(g, f, epsilon);
    double s = 0.0;
    for (double v : lv) s += std::pow(v, p);
    return s / p;
}

void validate_label_vector(std::span<const double> y) {
    bool any = false;
    for (double v : y) {
        require(v == 1.0 || v == -1.0 || v == 0.0, ErrorKind::invalid_argument,
                "label vector entries must be +1, -1 or 0");
        any = any || v != 0.0;
    }
    require(any, ErrorKind::insufficient_data, "label vector has no labelled node");
}

void SolverConfig::validate() const {
    require(p >= 1.0 && std::isfinite(p), ErrorKind::invalid_argument, "p must be >= 1");
    require(mu > 0.0 && std::isfinite(mu), ErrorKind::invalid_argument, "mu must be positive");
    require(epsilon > 0.0, ErrorKind::invalid_argument, "epsilon must be positive");
    require(max_iters >= 1, ErrorKind::invalid_argument, "max_iters must be >= 1");
    require(tol >= 0.0, ErrorKind::invalid_argument, "tol must be non-negative");
    require(zero_class == 1 || zero_class == -1, ErrorKind::invalid_argument,
            "zero_class must be +1 or -1");
}

SweepWeights sweep_weights(const SimilarityGraph& g, std::span<const double> f,
                           const SolverConfig& cfg) {
    const auto lv = local_variation(g, f, cfg.epsilon);
    std::vector<double> pw(g.n);
    for (std::size_t i = 0; i < g.n; ++i) pw[i] = std::pow(lv[i], cfg.p - 2.0);

    SweepWeights sw;
    sw.neighbor_weight.resize(g.slots());
    sw.self_weight.resize(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
        double total = cfg.mu;
        for (std::size_t s = g.row_begin(j); s < g.row_end(j); ++s) {
            const double m = 0.5 * g.weights[s] * (pw[g.neighbors[s]] + pw[j]);
            sw.neighbor_weight[s] = m;
            total += m;
        }
        for (std::size_t s = g.row_begin(j); s < g.row_end(j); ++s) sw.neighbor_weight[s] /= total;
        sw.self_weight[j] = cfg.mu / total;
    }
    return sw;
}

SolverResult solve_ssl(const SimilarityGraph& g, std::span<const double> y,
                       const SolverConfig& cfg) {
    cfg.validate();
    require_vertex_fn(g, y);
    validate_label_vector(y);

    SolverResult res;
    res.f.assign(y.begin(), y.end());
    std::vector<double> next(g.n);
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const auto sw = sweep_weights(g, res.f, cfg);
        double step = 0.0;
        for (std::size_t j = 0; j < g.n; ++j) {
            double v = sw.self_weight[j] * y[j];
            for (std::size_t s = g.row_begin(j); s < g.row_end(j); ++s)
                v += sw.neighbor_weight[s] * res.f[g.neighbors[s]];
            next[j] = v;
            step = std::max(step, std::abs(v - res.f[j]));
        }
        res.f.swap(next);
        res.iterations = it;
        res.last_step = step;
        if (step <= cfg.tol) {
            res.converged = true;
            break;
        }
    }

    const auto lp = p_laplacian(g, res.f, cfg.p, cfg.epsilon);
    res.residual = 0.0;
    for (std::size_t j = 0; j < g.n; ++j)
        res.residual = std::max(res.residual, std::abs(lp[j] + cfg.mu * (res.f[j] - y[j])));

    res.classes.resize(g.n);
    for (std::size_t j = 0; j < g.n; ++j)
        res.classes[j] = res.f[j] > 0.0 ? 1 : res.f[j] < 0.0 ? -1 : cfg.zero_class;
    return res;
}

GraphExperimentResult run_graph_experiment(const LabeledDataset& ds,
                                           const GraphExperimentConfig& cfg) {
    ds.validate();
    cfg.solver.validate();
    require(!cfg.p_values.empty(), ErrorKind::invalid_argument, "no p values requested");
    const std::size_t n = ds.size();
    const std::size_t test_count =
        cfg.test_count > 0 ? cfg.test_count
                           : static_cast<std::size_t>(std::llround(static_cast<double>(n) * 514.0 / 1722.0));
    require(test_count < n, ErrorKind::insufficient_data, "test split leaves no training rows");

    const auto split = stratified_holdout(ds.labels, test_count, cfg.split_seed);
    const auto g = build_knn_graph(ds.features, cfg.knn, cfg.t);

    LabelVector y(n, 0.0);
    for (std::size_t i : split.train) y[i] = ds.labels[i] == 1 ? 1.0 : -1.0;
    if (cfg.reveal_test_labels)
        for (std::size_t i : split.test) y[i] = ds.labels[i] == 1 ? 1.0 : -1.0;

    std::vector<int> truth;
    truth.reserve(split.test.size());
    for (std::size_t i : split.test) truth.push_back(ds.labels[i]);

    GraphExperimentResult out;
    out.train_count = split.train.size();
    out.test_count = split.test.size();
    out.n_edges = g.n_edges();
    for (double p : cfg.p_values) {
        SolverConfig sc = cfg.solver;
        sc.p = p;
        const auto sol = solve_ssl(g, y, sc);
        std::vector<int> preds;
        std::vector<double> scores;
        preds.reserve(split.test.size());
        scores.reserve(split.test.size());
        for (std::size_t i : split.test) {
            preds.push_back(sol.classes[i] > 0 ? 1 : 0);
            scores.push_back(sol.f[i]);
        }
        GraphExperimentRow row;
        row.p = p;
        row.test = evaluate(truth, preds, scores);
        row.iterations = sol.iterations;
        row.converged = sol.converged;
        out.rows.push_back(row);
    }
    return out;
}

} // namespace fraudkit
