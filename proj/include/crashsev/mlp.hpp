#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "crashsev/dataset.hpp"
#include "crashsev/standardize.hpp"

namespace crashsev {

struct MlpConfig {
    std::vector<int> hidden = {128, 128, 128, 64};
    int epochs = 150;
    int batch_size = 2048;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Fully connected rectifier network with a softmax head. W[l] maps layer l
/// activations (columns = fan-in) to layer l+1 pre-activations.
struct MlpModel {
    std::vector<int> layer_sizes;  ///< [d_in, hidden..., 3]
    std::vector<Eigen::MatrixXd> W;  ///< W[l]: layer_sizes[l+1] x layer_sizes[l]
    std::vector<Eigen::VectorXd> b;
    Standardizer standardizer;
    MlpConfig config;

    /// Probabilities for a batch of raw feature rows: standardizes, applies
    /// the hidden layers with the rectifier, then a row-stabilized softmax.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;
    Eigen::Vector3d predict_proba(const Eigen::VectorXd& x) const;
};

struct MlpGradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
};

/// Weights drawn uniformly within +-sqrt(6/fan_in) (rectifier fan-in
/// scheme), biases zero. The standardizer is left as the identity map.
MlpModel init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Mean softmax cross-entropy on pre-standardized inputs, computed through
/// log-sum-exp so saturated logits stay finite.
double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& Xz, const std::vector<Severity>& y);

/// Analytic backpropagation gradients of mlp_loss at the current weights.
MlpGradients mlp_gradients(const MlpModel& model, const Eigen::MatrixXd& Xz,
                           const std::vector<Severity>& y);

/// Mini-batch training with adaptive moment estimation. The standardizer is
/// fitted on the training split; rows are reshuffled every epoch from a
/// seeded stream. Throws DivergenceError when the loss leaves the finite
/// range.
MlpModel mlp_train(const CrashDataset& train, const MlpConfig& config, std::uint64_t seed);

}  // namespace crashsev
