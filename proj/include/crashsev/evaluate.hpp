#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crashsev/causality.hpp"
#include "crashsev/dataset.hpp"
#include "crashsev/model.hpp"

namespace crashsev {

/// 3x3 count matrix; rows index the true class, columns the predicted class,
/// both in PDO, BC, KA order.
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

    std::int64_t total() const;
    std::int64_t row_total(int c) const;
    std::int64_t col_total(int c) const;
};

ConfusionMatrix confusion(const std::vector<Severity>& truth, const std::vector<Severity>& pred);

/// Row-normalized (true-class conditional) matrix. An all-zero row stays
/// all-zero and its index lands in empty_rows.
struct NormalizedConfusion {
    Eigen::Matrix3d rates = Eigen::Matrix3d::Zero();
    std::vector<int> empty_rows;
};

NormalizedConfusion normalize_rows(const ConfusionMatrix& cm);

/// Zero-denominator ratios are reported as 0 with the matching flag set so
/// reports stay machine-diffable.
struct MetricsReport {
    double accuracy = 0.0;
    std::array<double, kNumClasses> recall{};
    std::array<double, kNumClasses> precision{};
    std::array<double, kNumClasses> f1{};
    double macro_f1 = 0.0;
    std::array<bool, kNumClasses> recall_undefined{};
    std::array<bool, kNumClasses> precision_undefined{};
    std::array<bool, kNumClasses> f1_undefined{};
};

MetricsReport metrics(const ConfusionMatrix& cm);

/// One-vs-rest area under the ROC curve per class, from predicted
/// probabilities (rows aligned with `truth`). Ties in the score contribute
/// half. Classes absent from `truth` (or covering it entirely) get flag
/// `undefined` and value 0.
struct AucReport {
    std::array<double, kNumClasses> auc{};
    std::array<bool, kNumClasses> undefined{};
};

AucReport one_vs_rest_auc(const std::vector<Severity>& truth, const Eigen::MatrixXd& probs);

/// Model predictions over a dataset; the dataset is projected onto the
/// model's recorded feature columns by name first, so a wider table is fine.
std::vector<Severity> predict_dataset(const Model& model, const CrashDataset& ds);

struct EvaluationResult {
    ConfusionMatrix cm;
    NormalizedConfusion normalized;
    MetricsReport metrics;
};

EvaluationResult evaluate_model(const Model& model, const CrashDataset& test);

/// Full-vs-reduced comparison for one algorithm.
struct ComparisonReport {
    LearnerKind kind = LearnerKind::kDecisionTree;
    EvaluationResult full;
    EvaluationResult reduced;
    std::vector<int> reduced_features;  ///< column ids in the training schema
    std::array<double, kNumClasses> recall_delta{};  ///< reduced - full
};

/// Trains the algorithm twice on the same balanced training split and seed —
/// once on every feature, once on the top-k ranked features — and evaluates
/// both sides on the identical test split. `balanced_train` must already be
/// balanced; `ranking` must come from training data only.
ComparisonReport compare_reduced_full(const CrashDataset& balanced_train,
                                      const CrashDataset& test, const GcRanking& ranking, int k,
                                      const TrainConfig& config);

/// Writes a metrics report (plus the confusion matrix) as key=value lines.
void save_metrics(const EvaluationResult& result, const std::string& path);

}  // namespace crashsev
