#pragma once

#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include "fraudkit/dataset.hpp"
#include "fraudkit/metrics.hpp"

namespace fraudkit {

/// Sparse symmetric weighted graph in CSR form. Slot s in row i stores the
/// directed edge i -> neighbors[s] with weight weights[s]; reverse[s] is the
/// slot of the opposite direction. Edges exist iff their weight is > 0 and
/// there are no self loops.
struct SimilarityGraph {
    std::size_t n = 0;
    std::vector<std::size_t> offsets{0};
    std::vector<std::size_t> neighbors;
    std::vector<double> weights;
    std::vector<std::size_t> reverse;

    /// Builds from undirected edges (i, j, w). Duplicate pairs keep the last
    /// weight; w <= 0 drops the pair.
    static SimilarityGraph from_edges(std::size_t n,
                                      std::span<const std::tuple<std::size_t, std::size_t, double>> edges);

    std::size_t slots() const noexcept { return neighbors.size(); }
    std::size_t n_edges() const noexcept { return neighbors.size() / 2; }
    std::size_t row_begin(std::size_t i) const { return offsets[i]; }
    std::size_t row_end(std::size_t i) const { return offsets[i + 1]; }
    double weight(std::size_t i, std::size_t j) const;

    void validate() const;
};

/// Edge functions F_ij are stored per CSR slot (i -> j).
using EdgeFunction = std::vector<double>;

/// Edge (i, j) iff i is among the k nearest (Euclidean) neighbours of j or
/// vice versa; weight exp(-d(x_i, x_j) / t) with the plain (not squared)
/// distance. Distance ties resolve to the lower index. Weights that underflow
/// to zero drop the edge.
SimilarityGraph build_knn_graph(const Matrix& features, std::size_t k, double t);

// Discrete calculus on the graph.
std::vector<double> degree(const SimilarityGraph& g);
/// (df)_ij = sqrt(w_ij) (f_j - f_i)
EdgeFunction gradient(const SimilarityGraph& g, std::span<const double> f);
/// (div F)_j = sum_{i~j} sqrt(w_ij) (F_ji - F_ij)
std::vector<double> divergence(const SimilarityGraph& g, std::span<const double> edge_fn);
/// (Lap f)_j = d_j f_j - sum_{i~j} w_ij f_i
std::vector<double> laplacian(const SimilarityGraph& g, std::span<const double> f);
/// ||d_i f|| = sqrt(sum_{j~i} (df)_ij^2 + epsilon)
std::vector<double> local_variation(const SimilarityGraph& g, std::span<const double> f,
                                    double epsilon);
/// (kappa f)_j = 1/2 sum_{i~j} w_ij (1/||d_i f|| + 1/||d_j f||) (f_j - f_i)
std::vector<double> curvature(const SimilarityGraph& g, std::span<const double> f, double epsilon);
/// (Lap_p f)_j = 1/2 sum_{i~j} w_ij (||d_i f||^(p-2) + ||d_j f||^(p-2)) (f_j - f_i)
std::vector<double> p_laplacian(const SimilarityGraph& g, std::span<const double> f, double p,
                                double epsilon);

double vertex_inner(std::span<const double> f, std::span<const double> g);
/// Sum over directed slots, i.e. over ordered pairs (i, j) with j ~ i.
double edge_inner(const SimilarityGraph& g, std::span<const double> a, std::span<const double> b);

/// <Lap f, f>
double laplacian_energy(const SimilarityGraph& g, std::span<const double> f);
/// sum_i ||d_i f||
double total_variation(const SimilarityGraph& g, std::span<const double> f, double epsilon);
/// (1/p) sum_i ||d_i f||^p
double p_smoothness(const SimilarityGraph& g, std::span<const double> f, double p, double epsilon);

/// Entries +1 (fraud), -1 (normal), 0 (unlabelled).
using LabelVector = std::vector<double>;
void validate_label_vector(std::span<const double> y);

struct SolverConfig {
    double p = 2.0;
    double mu = 1.0;
    double epsilon = 1e-10;
    int max_iters = 1000;
    double tol = 1e-6;   ///< on max |f(t+1) - f(t)|
    int zero_class = -1; ///< class assigned when f_i == 0

    void validate() const;
};

/// Coefficients of one sweep: slot s of row j holds p_ij for neighbour
/// i = neighbors[s]; self_weight[j] is p_jj. Each row sums to one.
struct SweepWeights {
    std::vector<double> neighbor_weight;
    std::vector<double> self_weight;
};

/// m_ij = 1/2 w_ij (||d_i f||^(p-2) + ||d_j f||^(p-2)),
/// p_ij = m_ij / (sum_i m_ij + mu), p_jj = mu / (sum_i m_ij + mu).
SweepWeights sweep_weights(const SimilarityGraph& g, std::span<const double> f,
                           const SolverConfig& cfg);

struct SolverResult {
    std::vector<double> f;
    std::vector<int> classes; ///< +1 / -1
    int iterations = 0;
    bool converged = false;
    double last_step = 0.0;
    /// max_j |(Lap_p f)_j + mu (f_j - y_j)| at the returned f
    double residual = 0.0;
};

/// Fixed-point iteration f_j <- sum_i p_ij f_i + p_jj y_j from f = y, with
/// Jacobi sweeps (every update reads the previous iterate and the weights
/// are recomputed each sweep). Non-convergence is not an error: the result
/// comes back with converged == false.
SolverResult solve_ssl(const SimilarityGraph& g, std::span<const double> y,
                       const SolverConfig& cfg);

struct GraphExperimentConfig {
    std::size_t knn = 5;
    double t = 0.1;
    SolverConfig solver;
    std::vector<double> p_values{1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0};
    std::size_t test_count = 0; ///< 0: round(n * 514 / 1722)
    std::uint64_t split_seed = 0;
    bool reveal_test_labels = false; ///< sanity mode: test rows keep their labels in y
};

struct GraphExperimentRow {
    double p = 0.0;
    MetricReport test;
    int iterations = 0;
    bool converged = false;
};

struct GraphExperimentResult {
    std::vector<GraphExperimentRow> rows;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    std::size_t n_edges = 0;
};

/// Builds the kNN graph over all rows, labels the training rows with +/-1,
/// leaves test rows at 0, solves once per p and scores the test rows.
GraphExperimentResult run_graph_experiment(const LabeledDataset& ds,
                                           const GraphExperimentConfig& cfg);

} // namespace fraudkit
