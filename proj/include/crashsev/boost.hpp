#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "crashsev/dataset.hpp"

namespace crashsev {

struct BoostConfig {
    int rounds = 100;
    double eta = 0.3;
    double lambda = 1.0;  ///< L2 penalty on leaf weights
    double gamma = 0.0;   ///< per-split penalty
    int max_depth = 6;
    double min_child_hessian = 1.0;
    int n_threads = 0;
};

/// Regression-tree arena node; leaves carry an unscaled weight.
struct RegTreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;
};

struct RegTree {
    std::vector<RegTreeNode> nodes;
    double value_of(const Eigen::VectorXd& x) const;
};

/// Second-order boosted ensemble over softmax cross-entropy. The class score
/// is f_c(x) = base_score + eta * sum over rounds of tree_c(x); probabilities
/// are the softmax of the three scores.
struct BoostModel {
    std::vector<std::array<RegTree, kNumClasses>> rounds;
    BoostConfig config;
    double base_score = 0.0;
    std::vector<double> train_loss;  ///< mean log-loss before round 1, after each round

    Eigen::Vector3d scores_of(const Eigen::VectorXd& x) const;
    Eigen::Vector3d predict_proba(const Eigen::VectorXd& x) const;
};

/// Per round and class, fits a regression tree to gradients
/// g_i = p_ic - [y_i = c] and hessians h_i = p_ic (1 - p_ic); leaf weight
/// w = -sum g / (sum h + lambda); split gain
/// (G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H_L+H_R+lambda))/2
/// - gamma, kept only when strictly positive and both children reach
/// min_child_hessian. Deterministic: no random element.
BoostModel train_gradient_boost(const CrashDataset& train, const BoostConfig& config);

/// Mean softmax cross-entropy of the model on a dataset.
double boost_log_loss(const BoostModel& model, const CrashDataset& ds);

}  // namespace crashsev
