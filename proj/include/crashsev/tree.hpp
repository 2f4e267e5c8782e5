#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "crashsev/dataset.hpp"
#include "crashsev/rng.hpp"

namespace crashsev {

struct TreeConfig {
    int max_depth = -1;          ///< -1 = unlimited
    int min_samples_split = 2;
    int features_per_split = -1; ///< -1 = consider every feature
};

/// Arena node: interior when feature >= 0, leaf otherwise. Rows with
/// x[feature] <= threshold go left. Leaves carry the training class counts.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<std::int64_t, kNumClasses> counts{};
};

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

/// Exhaustive scan over the candidate features: thresholds sit at midpoints
/// of consecutive distinct sorted values (midpoints that round onto the upper
/// value are skipped — no representable threshold separates the pair), scored
/// by Gini impurity decrease gain = gini(parent) - sum_side (n_side/n) *
/// gini(side) with gini = 1 - sum_c (count_c/n)^2. Returns the max-gain split
/// with ties broken toward the lower feature index, then the lower threshold;
/// nullopt when no split has strictly positive gain.
std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& X, const std::vector<Severity>& y,
                                         const std::vector<std::int64_t>& rows,
                                         const std::vector<int>& candidate_features);

struct DecisionTreeModel {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root
    TreeConfig config;

    /// Index of the leaf the point routes to.
    int leaf_of(const Eigen::VectorXd& x) const;
    /// Leaf class counts normalized to a probability triple.
    Eigen::Vector3d predict_proba(const Eigen::VectorXd& x) const;
};

/// Greedy recursive growth over the given rows. When features_per_split is
/// narrower than the feature count, each node draws that many distinct
/// feature columns from `rng`; otherwise `rng` is never consumed.
DecisionTreeModel grow_tree(const Eigen::MatrixXd& X, const std::vector<Severity>& y,
                            std::vector<std::int64_t> rows, const TreeConfig& config, Rng& rng);

/// Trains on every row of the dataset. The seed only matters when
/// features_per_split narrows the candidate set. Training on a test split is
/// refused.
DecisionTreeModel train_decision_tree(const CrashDataset& train, const TreeConfig& config,
                                      std::uint64_t seed = 0);

}  // namespace crashsev
