#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "crashsev/boost.hpp"
#include "crashsev/dataset.hpp"
#include "crashsev/forest.hpp"
#include "crashsev/mlp.hpp"
#include "crashsev/tree.hpp"

namespace crashsev {

enum class LearnerKind { kDecisionTree = 0, kRandomForest = 1, kGradientBoost = 2, kMlp = 3 };

/// Short CLI names: dt, rf, xgb, dnn.
const char* learner_name(LearnerKind kind);
LearnerKind learner_from_name(const std::string& name);

/// Per-learner hyperparameters plus the master seed; `kind` selects which
/// block applies.
struct TrainConfig {
    LearnerKind kind = LearnerKind::kDecisionTree;
    std::uint64_t seed = 0;
    TreeConfig tree;
    ForestConfig forest;
    BoostConfig boost;
    MlpConfig mlp;
};

/// A trained classifier of any kind plus the names of the feature columns it
/// consumes, in order. Evaluation uses the names to project wider datasets
/// down to the model's inputs.
struct Model {
    std::vector<std::string> feature_names;
    std::variant<DecisionTreeModel, RandomForestModel, BoostModel, MlpModel> impl;

    LearnerKind kind() const { return static_cast<LearnerKind>(impl.index()); }

    Eigen::Vector3d predict_proba(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd predict_proba_batch(const Eigen::MatrixXd& X) const;
    /// Argmax of the probabilities; exact ties resolve to the lower class.
    Severity predict(const Eigen::VectorXd& x) const;
};

Model train_model(const CrashDataset& train, const TrainConfig& config);

/// Versioned little-endian binary serialization. A reloaded model reproduces
/// the original's predictions exactly.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace crashsev
