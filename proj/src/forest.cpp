#include "fraudkit/forest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fraudkit/parallel.hpp"

namespace fraudkit {

double gini(std::size_t positives, std::size_t total) noexcept {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(positives) / static_cast<double>(total);
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

std::size_t default_features_per_split(std::size_t n_features) noexcept {
    const auto k = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n_features))));
    return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n_features, 1));
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
    require(!nodes_.empty(), ErrorKind::invalid_argument, "empty tree");
    std::size_t at = 0;
    while (!nodes_[at].is_leaf()) {
        const auto& node = nodes_[at];
        at = static_cast<std::size_t>(x[node.feature] <= node.threshold ? node.left : node.right);
    }
    return nodes_[at];
}

double DecisionTree::predict(std::span<const double> x) const {
    return leaf_for(x).positive_fraction;
}

int DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<int> d(nodes_.size(), 0);
    int deepest = 0;
    // children always come after their parent in preorder
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].is_leaf()) continue;
        d[nodes_[i].left] = d[nodes_[i].right] = d[i] + 1;
        deepest = std::max(deepest, d[i] + 1);
    }
    return deepest;
}

namespace {

struct SplitCandidate {
    double score = 0.0; // weighted Gini numerator, lower is better
    std::size_t feature = 0;
    double threshold = 0.0;
    bool found = false;

    bool better_than(const SplitCandidate& o) const noexcept {
        if (!o.found) return true;
        if (score != o.score) return score < o.score;
        if (feature != o.feature) return feature < o.feature;
        return threshold < o.threshold;
    }
};

class TreeBuilder {
public:
    TreeBuilder(const LabeledDataset& ds, const TreeParams& params, Rng& rng)
        : ds_(ds), params_(params), rng_(rng), feature_order_(ds.n_features()) {
        std::iota(feature_order_.begin(), feature_order_.end(), std::size_t{0});
        mtry_ = params.n_features_per_split == 0
                    ? ds.n_features()
                    : std::min(params.n_features_per_split, ds.n_features());
        min_leaf_ = std::max<std::size_t>(params.min_leaf, 1);
    }

    std::vector<TreeNode> build(std::vector<std::size_t> rows) {
        grow(std::move(rows), 0);
        return std::move(nodes_);
    }

private:
    int grow(std::vector<std::size_t> rows, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        std::size_t positives = 0;
        for (std::size_t r : rows) positives += static_cast<std::size_t>(ds_.labels[r]);
        nodes_[id].sample_count = rows.size();
        nodes_[id].positive_fraction =
            static_cast<double>(positives) / static_cast<double>(rows.size());

        const bool depth_stop = params_.max_depth >= 0 && depth >= params_.max_depth;
        const bool pure = positives == 0 || positives == rows.size();
        if (depth_stop || pure || rows.size() < 2 * min_leaf_) return id;

        const SplitCandidate split = best_split(rows, positives);
        if (!split.found) return id;

        std::vector<std::size_t> left, right;
        for (std::size_t r : rows)
            (ds_.features(r, split.feature) <= split.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        nodes_[id].feature = static_cast<int>(split.feature);
        nodes_[id].threshold = split.threshold;
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    SplitCandidate best_split(const std::vector<std::size_t>& rows, std::size_t positives) {
        const std::size_t n = rows.size();
        SplitCandidate best;
        std::size_t examined = 0;
        // lazy Fisher-Yates: draw features one at a time until mtry usable ones
        for (std::size_t k = 0; k < feature_order_.size() && examined < mtry_; ++k) {
            const auto j = k + static_cast<std::size_t>(uniform_index(rng_, feature_order_.size() - k));
            std::swap(feature_order_[k], feature_order_[j]);
            const std::size_t f = feature_order_[k];

            column_.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                column_[i] = {ds_.features(rows[i], f), ds_.labels[rows[i]]};
            std::sort(column_.begin(), column_.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (column_.front().first == column_.back().first) continue;
            ++examined;

            std::size_t left_pos = 0;
            for (std::size_t s = 1; s < n; ++s) {
                left_pos += static_cast<std::size_t>(column_[s - 1].second);
                if (column_[s - 1].first == column_[s].first) continue;
                if (s < min_leaf_ || n - s < min_leaf_) continue;
                SplitCandidate c;
                c.found = true;
                c.feature = f;
                c.score = weighted_gini(left_pos, s, positives - left_pos, n - s);
                c.threshold = midpoint(column_[s - 1].first, column_[s].first);
                if (c.better_than(best)) best = c;
            }
        }
        return best;
    }

    static double weighted_gini(std::size_t lp, std::size_t ln, std::size_t rp, std::size_t rn) {
        return static_cast<double>(ln) * gini(lp, ln) + static_cast<double>(rn) * gini(rp, rn);
    }

    // strictly below b so that b itself is routed right
    static double midpoint(double a, double b) {
        const double m = a + (b - a) / 2.0;
        return m < b ? m : a;
    }

    const LabeledDataset& ds_;
    const TreeParams& params_;
    Rng& rng_;
    std::vector<std::size_t> feature_order_;
    std::vector<std::pair<double, int>> column_;
    std::vector<TreeNode> nodes_;
    std::size_t mtry_ = 1;
    std::size_t min_leaf_ = 1;
};

} // namespace

DecisionTree train_tree(const LabeledDataset& ds, std::span<const std::size_t> rows,
                        const TreeParams& params, Rng& rng) {
    require(!rows.empty(), ErrorKind::insufficient_data, "cannot train a tree on an empty dataset");
    require(ds.n_features() >= 1, ErrorKind::invalid_argument, "dataset has no features");
    TreeBuilder builder(ds, params, rng);
    return DecisionTree(builder.build({rows.begin(), rows.end()}));
}

DecisionTree train_tree(const LabeledDataset& ds, const TreeParams& params, Rng& rng) {
    std::vector<std::size_t> rows(ds.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return train_tree(ds, rows, params, rng);
}

ForestModel train_forest(const LabeledDataset& ds, const ForestParams& params,
                         std::uint64_t seed) {
    require(params.n_trees >= 1, ErrorKind::invalid_argument, "n_trees must be >= 1");
    require(ds.size() > 0, ErrorKind::insufficient_data, "cannot train a forest on an empty dataset");
    require(ds.n_features() >= 1, ErrorKind::invalid_argument, "dataset has no features");

    ForestModel model;
    model.n_features = ds.n_features();
    model.n_features_per_split = params.n_features_per_split == 0
                                     ? default_features_per_split(ds.n_features())
                                     : params.n_features_per_split;
    require(model.n_features_per_split <= ds.n_features(), ErrorKind::invalid_argument,
            "n_features_per_split exceeds the number of features");
    model.seed = seed;

    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.min_leaf = params.min_leaf;
    tp.n_features_per_split = model.n_features_per_split;

    model.trees.resize(static_cast<std::size_t>(params.n_trees));
    const std::size_t n = ds.size();
    parallel_for(model.trees.size(), params.threads, [&](std::size_t b) {
        Rng rng(derive_seed(seed, b));
        std::vector<std::size_t> rows(n);
        if (params.bootstrap) {
            for (auto& r : rows) r = static_cast<std::size_t>(uniform_index(rng, n));
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        model.trees[b] = train_tree(ds, rows, tp, rng);
    });
    return model;
}

std::vector<double> ForestModel::tree_outputs(std::span<const double> x) const {
    require(x.size() == n_features, ErrorKind::dimension_mismatch,
            "expected " + std::to_string(n_features) + " features, got " + std::to_string(x.size()));
    std::vector<double> out;
    out.reserve(trees.size());
    for (const auto& t : trees) out.push_back(t.predict(x));
    return out;
}

double ForestModel::predict_proba(std::span<const double> x) const {
    require(!trees.empty(), ErrorKind::invalid_argument, "forest has no trees");
    const auto outs = tree_outputs(x);
    double sum = 0.0;
    for (double v : outs) sum += v;
    return sum / static_cast<double>(outs.size());
}

std::vector<double> ForestModel::predict_proba(const Matrix& x) const {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_proba(x.row(i));
    return out;
}

double ForestModel::predict_std(std::span<const double> x) const {
    require(trees.size() >= 2, ErrorKind::invalid_argument,
            "standard deviation needs at least two trees");
    const auto outs = tree_outputs(x);
    double mean = 0.0;
    for (double v : outs) mean += v;
    mean /= static_cast<double>(outs.size());
    double ss = 0.0;
    for (double v : outs) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(outs.size() - 1));
}

namespace {

constexpr std::string_view kForestMagic = "fraudkit-forest";
constexpr int kForestVersion = 1;

std::string hex(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
    return std::string(buf, ptr);
}

double parse_hex(const std::string& token) {
    double v = 0.0;
    std::string_view s = token;
    bool negative = false;
    if (!s.empty() && s.front() == '-') {
        negative = true;
        s.remove_prefix(1);
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
    require(ec == std::errc{} && ptr == s.data() + s.size(), ErrorKind::invalid_argument,
            "bad hex float '" + token + "' in serialized forest");
    return negative ? -v : v;
}

template <typename T>
T read_field(std::istream& in, std::string_view key) {
    std::string name;
    T value{};
    in >> name >> value;
    require(in.good() && name == key, ErrorKind::invalid_argument,
            "serialized forest: expected field '" + std::string(key) + "'");
    return value;
}

} // namespace

std::string serialize(const ForestModel& model) {
    std::ostringstream out;
    out << kForestMagic << ' ' << kForestVersion << '\n';
    out << "n_features " << model.n_features << '\n';
    out << "n_features_per_split " << model.n_features_per_split << '\n';
    out << "seed " << model.seed << '\n';
    out << "trees " << model.trees.size() << '\n';
    for (const auto& tree : model.trees) {
        out << "tree " << tree.nodes().size() << '\n';
        for (const auto& nd : tree.nodes()) {
            out << nd.feature << ' ' << hex(nd.threshold) << ' ' << nd.left << ' ' << nd.right
                << ' ' << hex(nd.positive_fraction) << ' ' << nd.sample_count << '\n';
        }
    }
    return out.str();
}

ForestModel deserialize_forest(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string magic;
    int version = 0;
    in >> magic >> version;
    require(magic == kForestMagic, ErrorKind::invalid_argument, "not a serialized forest");
    require(version == kForestVersion, ErrorKind::invalid_argument,
            "unsupported forest format version " + std::to_string(version));

    ForestModel model;
    model.n_features = read_field<std::size_t>(in, "n_features");
    model.n_features_per_split = read_field<std::size_t>(in, "n_features_per_split");
    model.seed = read_field<std::uint64_t>(in, "seed");
    const auto n_trees = read_field<std::size_t>(in, "trees");
    model.trees.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        const auto n_nodes = read_field<std::size_t>(in, "tree");
        std::vector<TreeNode> nodes(n_nodes);
        for (auto& nd : nodes) {
            std::string thr, frac;
            in >> nd.feature >> thr >> nd.left >> nd.right >> frac >> nd.sample_count;
            require(!in.fail(), ErrorKind::invalid_argument, "truncated serialized forest");
            nd.threshold = parse_hex(thr);
            nd.positive_fraction = parse_hex(frac);
            const auto limit = static_cast<int>(n_nodes);
            require(nd.left < limit && nd.right < limit && nd.feature < static_cast<int>(model.n_features),
                    ErrorKind::invalid_argument, "serialized forest has out-of-range node links");
        }
        model.trees.emplace_back(std::move(nodes));
    }
    return model;
}

} // namespace fraudkit
