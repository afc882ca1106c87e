#pragma once

#include <cstdint>

#include "fraudkit/matrix.hpp"

namespace fraudkit {

struct KMeansParams {
    int max_iterations = 300;
    double tolerance = 1e-4; ///< stop when the relative inertia decrease falls below this
};

struct KMeansResult {
    Matrix centroids;
    std::vector<std::size_t> assignment;
    double inertia = 0.0;
    int iterations = 0;
};

/// Lloyd's k-means with k-means++ seeding and Euclidean distance. Assignment
/// uses Hamerly's bounds to skip distance evaluations; the result equals plain
/// Lloyd iterations. Deterministic under `seed`. Fails if `points` has fewer
/// than k distinct rows.
KMeansResult kmeans(const Matrix& points, std::size_t k, const KMeansParams& params,
                    std::uint64_t seed);

} // namespace fraudkit
