#pragma once

#include <cstdint>
#include <vector>

#include "crashsev/tree.hpp"

namespace crashsev {

struct ForestConfig {
    int n_estimators = 1000;
    int max_depth = -1;
    int min_samples_split = 2;
    int features_per_split = -1;  ///< -1 = floor(sqrt(d))
    bool bootstrap = true;
    int n_threads = 0;  ///< 0 = hardware concurrency
};

struct RandomForestModel {
    std::vector<DecisionTreeModel> trees;
    ForestConfig config;
    std::uint64_t seed = 0;

    /// Mean of the member trees' probability vectors.
    Eigen::Vector3d predict_proba(const Eigen::VectorXd& x) const;
};

/// Bagged forest: tree i trains on a bootstrap resample of size n drawn from
/// a stream seeded by (seed, i), then samples features per node from the same
/// stream. Parallel and serial training produce identical forests.
RandomForestModel train_random_forest(const CrashDataset& train, const ForestConfig& config,
                                      std::uint64_t seed);

}  // namespace crashsev
