#include "fraudkit/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fraudkit/error.hpp"
#include "fraudkit/rng.hpp"

namespace fraudkit {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

Matrix seed_plus_plus(const Matrix& x, std::size_t k, Rng& rng) {
    const std::size_t n = x.rows();
    Matrix centers(k, x.cols());
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

    auto adopt = [&](std::size_t c, std::size_t row) {
        std::copy_n(x.row(row).begin(), x.cols(), centers.row(c).begin());
        for (std::size_t i = 0; i < n; ++i)
            nearest[i] = std::min(nearest[i], squared_distance(x.row(i), centers.row(c)));
    };

    adopt(0, static_cast<std::size_t>(uniform_index(rng, n)));
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double d : nearest) total += d;
        require(total > 0.0, ErrorKind::insufficient_data,
                "k-means: only " + std::to_string(c) + " distinct points for k=" + std::to_string(k));
        const double target = uniform01(rng) * total;
        double running = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (nearest[i] == 0.0) continue;
            running += nearest[i];
            pick = i;
            if (running > target) break;
        }
        adopt(c, pick);
    }
    return centers;
}

} // namespace

KMeansResult kmeans(const Matrix& x, std::size_t k, const KMeansParams& params,
                    std::uint64_t seed) {
    const std::size_t n = x.rows();
    const std::size_t dim = x.cols();
    require(k >= 1, ErrorKind::invalid_argument, "k-means needs k >= 1");
    require(n >= k, ErrorKind::insufficient_data,
            "k-means: k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " points");
    require(params.max_iterations >= 1, ErrorKind::invalid_argument, "max_iterations must be >= 1");

    Rng rng(derive_seed(seed, 0x6b6d65616e73ULL));
    KMeansResult res;
    res.centroids = seed_plus_plus(x, k, rng);
    Matrix& c = res.centroids;

    // Hamerly bounds: upper on distance to own center, lower on distance to
    // every other center.
    std::vector<std::size_t> assign(n, 0);
    std::vector<double> upper(n, std::numeric_limits<double>::infinity());
    std::vector<double> lower(n, 0.0);
    std::vector<double> half_gap(k, 0.0);
    std::vector<double> moved(k, 0.0);
    std::vector<std::size_t> counts(k);
    Matrix sums(k, dim);

    double previous_inertia = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= params.max_iterations; ++it) {
        res.iterations = it;
        for (std::size_t a = 0; a < k; ++a) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < k; ++b)
                if (a != b) best = std::min(best, squared_distance(c.row(a), c.row(b)));
            half_gap[a] = k > 1 ? 0.5 * std::sqrt(best) : std::numeric_limits<double>::infinity();
        }

        std::size_t changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double bound = std::max(half_gap[assign[i]], lower[i]);
            if (upper[i] <= bound) continue;
            upper[i] = std::sqrt(squared_distance(x.row(i), c.row(assign[i])));
            if (upper[i] <= bound) continue;

            std::size_t best = 0;
            double d1 = std::numeric_limits<double>::infinity();
            double d2 = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) {
                const double d = squared_distance(x.row(i), c.row(j));
                if (d < d1) {
                    d2 = d1;
                    d1 = d;
                    best = j;
                } else if (d < d2) {
                    d2 = d;
                }
            }
            if (best != assign[i]) ++changed;
            assign[i] = best;
            upper[i] = std::sqrt(d1);
            lower[i] = std::sqrt(d2);
        }
        if (it == 1) changed = n; // seeds are not means yet

        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) inertia += squared_distance(x.row(i), c.row(assign[i]));
        res.inertia = inertia;

        // running means are exact when every member is the same point
        std::fill(counts.begin(), counts.end(), 0);
        sums = Matrix(k, dim);
        for (std::size_t i = 0; i < n; ++i) {
            auto m = sums.row(assign[i]);
            const auto cnt = static_cast<double>(++counts[assign[i]]);
            auto xi = x.row(i);
            for (std::size_t d = 0; d < dim; ++d) m[d] += (xi[d] - m[d]) / cnt;
        }
        double max_move = 0.0, second_move = 0.0;
        std::size_t max_mover = 0;
        for (std::size_t j = 0; j < k; ++j) {
            moved[j] = 0.0;
            if (counts[j] == 0) continue; // empty cluster keeps its center
            moved[j] = std::sqrt(squared_distance(c.row(j), sums.row(j)));
            std::copy_n(sums.row(j).begin(), dim, c.row(j).begin());
            if (moved[j] > max_move) {
                second_move = max_move;
                max_move = moved[j];
                max_mover = j;
            } else if (moved[j] > second_move) {
                second_move = moved[j];
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            upper[i] += moved[assign[i]];
            lower[i] -= assign[i] == max_mover ? second_move : max_move;
        }

        if (changed == 0) break;
        if (std::isfinite(previous_inertia) &&
            previous_inertia - inertia <= params.tolerance * previous_inertia)
            break;
        previous_inertia = inertia;
    }
    res.assignment = std::move(assign);
    return res;
}

} // namespace fraudkit
