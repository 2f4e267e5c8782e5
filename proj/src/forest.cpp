#include "crashsev/forest.hpp"

#include <cmath>
#include <numeric>

#include "crashsev/error.hpp"
#include "crashsev/parallel.hpp"

namespace crashsev {

RandomForestModel train_random_forest(const CrashDataset& train, const ForestConfig& config,
                                      std::uint64_t seed) {
    if (train.lineage == Lineage::kTest) throw ConfigError("refusing to train on a test split");
    if (train.rows() < 2) throw ValueError("need at least two rows to train a forest");
    if (config.n_estimators < 1) throw ConfigError("n_estimators must be >= 1");

    const std::int64_t n = train.rows();
    TreeConfig tree_config;
    tree_config.max_depth = config.max_depth;
    tree_config.min_samples_split = config.min_samples_split;
    tree_config.features_per_split =
        config.features_per_split >= 0
            ? config.features_per_split
            : static_cast<int>(std::floor(std::sqrt(static_cast<double>(train.cols()))));

    RandomForestModel model;
    model.config = config;
    model.seed = seed;
    model.trees.resize(static_cast<std::size_t>(config.n_estimators));

    parallel_for(
        static_cast<std::size_t>(config.n_estimators),
        [&](std::size_t i) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
            std::vector<std::int64_t> rows(static_cast<std::size_t>(n));
            if (config.bootstrap) {
                for (auto& r : rows)
                    r = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
            } else {
                std::iota(rows.begin(), rows.end(), 0);
            }
            model.trees[i] = grow_tree(train.X, train.y, std::move(rows), tree_config, rng);
        },
        config.n_threads);
    return model;
}

Eigen::Vector3d RandomForestModel::predict_proba(const Eigen::VectorXd& x) const {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& tree : trees) sum += tree.predict_proba(x);
    return sum / static_cast<double>(trees.size());
}

}  // namespace crashsev
