#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fraudkit/dataset.hpp"
#include "fraudkit/rng.hpp"

namespace fraudkit {

/// A node is a leaf when `left < 0`. Internal nodes send x[feature] <= threshold
/// to `left`. Every node records the positive fraction and count of the
/// training samples that reached it.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double positive_fraction = 0.0;
    std::size_t sample_count = 0;

    bool is_leaf() const noexcept { return left < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
    int max_depth = -1;            ///< negative means unbounded
    std::size_t min_leaf = 1;
    std::size_t n_features_per_split = 0; ///< 0 means all features
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    /// Positive fraction of the leaf reached by x.
    double predict(std::span<const double> x) const;
    const TreeNode& leaf_for(std::span<const double> x) const;

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    const TreeNode& root() const { return nodes_.front(); }
    int depth() const;

    bool operator==(const DecisionTree&) const = default;

private:
    std::vector<TreeNode> nodes_;
};

/// Greedy CART tree minimising weighted Gini impurity. At each node features
/// are drawn in random order until `n_features_per_split` non-constant ones
/// have been examined; thresholds are midpoints between consecutive distinct
/// values. Equal-impurity candidates resolve to the lowest feature index, then
/// the lowest threshold. `rows` is a sample multiset of dataset row indices.
DecisionTree train_tree(const LabeledDataset& ds, std::span<const std::size_t> rows,
                        const TreeParams& params, Rng& rng);
DecisionTree train_tree(const LabeledDataset& ds, const TreeParams& params, Rng& rng);

/// Gini impurity 1 - p^2 - (1-p)^2 of a node with `positives` of `total`.
double gini(std::size_t positives, std::size_t total) noexcept;

struct ForestParams {
    int n_trees = 100;
    int max_depth = -1;
    std::size_t min_leaf = 1;
    std::size_t n_features_per_split = 0; ///< 0 means round(sqrt(p))
    bool bootstrap = true;
    unsigned threads = 1;                 ///< 0 means hardware concurrency
};

std::size_t default_features_per_split(std::size_t n_features) noexcept;

struct ForestModel {
    std::vector<DecisionTree> trees;
    std::size_t n_features = 0;
    std::size_t n_features_per_split = 0;
    std::uint64_t seed = 0;

    /// Mean of the per-tree leaf fractions, in [0,1].
    double predict_proba(std::span<const double> x) const;
    std::vector<double> predict_proba(const Matrix& x) const;
    std::vector<double> tree_outputs(std::span<const double> x) const;
    /// Sample standard deviation (denominator B-1) of the per-tree outputs.
    double predict_std(std::span<const double> x) const;

    bool operator==(const ForestModel&) const = default;
};

/// Tree b is grown from seed derive_seed(seed, b) on a bootstrap sample of
/// size n drawn with replacement, so the model does not depend on `threads`.
ForestModel train_forest(const LabeledDataset& ds, const ForestParams& params,
                         std::uint64_t seed);

/// Versioned text form; doubles are written as hex floats so the round trip
/// is exact.
std::string serialize(const ForestModel& model);
ForestModel deserialize_forest(std::string_view text);

} // namespace fraudkit
