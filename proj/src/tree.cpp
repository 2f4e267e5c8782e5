#include "crashsev/tree.hpp"

#include <algorithm>
#include <numeric>

#include "crashsev/error.hpp"

namespace crashsev {

namespace {

double gini_of(const std::array<std::int64_t, kNumClasses>& counts, double n) {
    double sum_sq = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        const double p = static_cast<double>(counts[static_cast<std::size_t>(c)]) / n;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

}  // namespace

std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& X, const std::vector<Severity>& y,
                                         const std::vector<std::int64_t>& rows,
                                         const std::vector<int>& candidate_features) {
    const std::int64_t n = static_cast<std::int64_t>(rows.size());
    if (n < 2) return std::nullopt;

    std::array<std::int64_t, kNumClasses> total{};
    for (std::int64_t i : rows) ++total[static_cast<std::size_t>(to_int(y[static_cast<std::size_t>(i)]))];
    const double parent_gini = gini_of(total, static_cast<double>(n));
    if (parent_gini == 0.0) return std::nullopt;

    std::optional<SplitCandidate> best;
    std::vector<std::pair<double, int>> values(static_cast<std::size_t>(n));

    for (int f : candidate_features) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            const std::int64_t r = rows[i];
            values[i] = {X(r, f), to_int(y[static_cast<std::size_t>(r)])};
        }
        std::sort(values.begin(), values.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::array<std::int64_t, kNumClasses> left{};
        for (std::int64_t i = 0; i + 1 < n; ++i) {
            ++left[static_cast<std::size_t>(values[static_cast<std::size_t>(i)].second)];
            const double lo = values[static_cast<std::size_t>(i)].first;
            const double hi = values[static_cast<std::size_t>(i + 1)].first;
            if (lo == hi) continue;
            const double mid = (lo + hi) / 2.0;
            if (mid >= hi) continue;  // adjacent doubles; midpoint rounds up

            std::array<std::int64_t, kNumClasses> right{};
            for (int c = 0; c < kNumClasses; ++c)
                right[static_cast<std::size_t>(c)] =
                    total[static_cast<std::size_t>(c)] - left[static_cast<std::size_t>(c)];
            const double n_left = static_cast<double>(i + 1);
            const double n_right = static_cast<double>(n - i - 1);
            const double child = (n_left / static_cast<double>(n)) * gini_of(left, n_left) +
                                 (n_right / static_cast<double>(n)) * gini_of(right, n_right);
            const double gain = parent_gini - child;
            if (gain <= 0.0) continue;
            if (!best || gain > best->gain ||
                (gain == best->gain &&
                 (f < best->feature || (f == best->feature && mid < best->threshold)))) {
                best = SplitCandidate{f, mid, gain};
            }
        }
    }
    return best;
}

namespace {

struct Grower {
    const Eigen::MatrixXd& X;
    const std::vector<Severity>& y;
    const TreeConfig& config;
    Rng& rng;
    std::vector<TreeNode> nodes;
    std::vector<int> all_features;

    int build(std::vector<std::int64_t>& rows, int depth) {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        std::array<std::int64_t, kNumClasses> counts{};
        for (std::int64_t i : rows)
            ++counts[static_cast<std::size_t>(to_int(y[static_cast<std::size_t>(i)]))];
        nodes[static_cast<std::size_t>(id)].counts = counts;

        const std::int64_t n = static_cast<std::int64_t>(rows.size());
        const bool depth_ok = config.max_depth < 0 || depth < config.max_depth;
        if (!depth_ok || n < config.min_samples_split) return id;

        const auto split = best_split(X, y, rows, node_features());
        if (!split) return id;

        std::vector<std::int64_t> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (std::int64_t i : rows) {
            if (X(i, split->feature) <= split->threshold)
                left_rows.push_back(i);
            else
                right_rows.push_back(i);
        }
        rows.clear();
        rows.shrink_to_fit();

        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        TreeNode& node = nodes[static_cast<std::size_t>(id)];
        node.feature = split->feature;
        node.threshold = split->threshold;
        node.left = left;
        node.right = right;
        return id;
    }

    std::vector<int> node_features() {
        const int d = static_cast<int>(X.cols());
        const int k = config.features_per_split;
        if (k < 0 || k >= d) return all_features;
        // Partial Fisher-Yates: the first k entries are a uniform draw
        // without replacement.
        std::vector<int> pool = all_features;
        for (int i = 0; i < k; ++i) {
            const std::size_t j =
                static_cast<std::size_t>(i) +
                static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(d - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        }
        pool.resize(static_cast<std::size_t>(k));
        std::sort(pool.begin(), pool.end());
        return pool;
    }
};

}  // namespace

DecisionTreeModel grow_tree(const Eigen::MatrixXd& X, const std::vector<Severity>& y,
                            std::vector<std::int64_t> rows, const TreeConfig& config, Rng& rng) {
    if (rows.empty()) throw ValueError("cannot grow a tree on zero rows");
    if (config.min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
    if (config.features_per_split == 0) throw ConfigError("features_per_split must be nonzero");

    Grower grower{X, y, config, rng, {}, {}};
    grower.all_features.resize(static_cast<std::size_t>(X.cols()));
    std::iota(grower.all_features.begin(), grower.all_features.end(), 0);
    grower.build(rows, 0);

    DecisionTreeModel model;
    model.nodes = std::move(grower.nodes);
    model.config = config;
    return model;
}

DecisionTreeModel train_decision_tree(const CrashDataset& train, const TreeConfig& config,
                                      std::uint64_t seed) {
    if (train.lineage == Lineage::kTest) throw ConfigError("refusing to train on a test split");
    if (train.rows() == 0) throw ValueError("empty training set");
    std::vector<std::int64_t> rows(static_cast<std::size_t>(train.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    Rng rng(seed);
    return grow_tree(train.X, train.y, std::move(rows), config, rng);
}

int DecisionTreeModel::leaf_of(const Eigen::VectorXd& x) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const TreeNode& node = nodes[static_cast<std::size_t>(id)];
        id = x(node.feature) <= node.threshold ? node.left : node.right;
    }
    return id;
}

Eigen::Vector3d DecisionTreeModel::predict_proba(const Eigen::VectorXd& x) const {
    const TreeNode& leaf = nodes[static_cast<std::size_t>(leaf_of(x))];
    std::int64_t n = 0;
    for (auto c : leaf.counts) n += c;
    Eigen::Vector3d p;
    for (int c = 0; c < kNumClasses; ++c)
        p(c) = static_cast<double>(leaf.counts[static_cast<std::size_t>(c)]) / static_cast<double>(n);
    return p;
}

}  // namespace crashsev
