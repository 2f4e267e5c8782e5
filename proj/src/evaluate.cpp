#include "crashsev/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "crashsev/error.hpp"

namespace crashsev {

namespace {

int argmax_row(const Eigen::MatrixXd& probs, Eigen::Index i) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (probs(i, c) > probs(i, best)) best = c;
    return best;
}

void write_kv(std::ofstream& out, const char* key, double value) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    out << key << '=' << buf << '\n';
}

}  // namespace

std::int64_t ConfusionMatrix::total() const {
    std::int64_t t = 0;
    for (const auto& row : counts)
        for (auto v : row) t += v;
    return t;
}

std::int64_t ConfusionMatrix::row_total(int c) const {
    std::int64_t t = 0;
    for (auto v : counts[static_cast<std::size_t>(c)]) t += v;
    return t;
}

std::int64_t ConfusionMatrix::col_total(int c) const {
    std::int64_t t = 0;
    for (const auto& row : counts) t += row[static_cast<std::size_t>(c)];
    return t;
}

ConfusionMatrix confusion(const std::vector<Severity>& truth, const std::vector<Severity>& pred) {
    if (truth.size() != pred.size())
        throw ValueError("true/predicted label vectors differ in length");
    if (truth.empty()) throw ValueError("cannot build a confusion matrix from zero rows");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++cm.counts[static_cast<std::size_t>(to_int(truth[i]))]
                   [static_cast<std::size_t>(to_int(pred[i]))];
    return cm;
}

NormalizedConfusion normalize_rows(const ConfusionMatrix& cm) {
    NormalizedConfusion out;
    for (int i = 0; i < kNumClasses; ++i) {
        const std::int64_t total = cm.row_total(i);
        if (total == 0) {
            out.empty_rows.push_back(i);
            continue;
        }
        for (int j = 0; j < kNumClasses; ++j)
            out.rates(i, j) =
                static_cast<double>(cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) /
                static_cast<double>(total);
    }
    return out;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total < 1) throw ValueError("empty confusion matrix");

    MetricsReport report;
    std::int64_t trace = 0;
    for (int c = 0; c < kNumClasses; ++c)
        trace += cm.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    report.accuracy = static_cast<double>(trace) / static_cast<double>(total);

    double f1_sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        const double tp =
            static_cast<double>(cm.counts[cc][cc]);
        const std::int64_t row = cm.row_total(c);
        const std::int64_t col = cm.col_total(c);

        if (row == 0)
            report.recall_undefined[cc] = true;
        else
            report.recall[cc] = tp / static_cast<double>(row);
        if (col == 0)
            report.precision_undefined[cc] = true;
        else
            report.precision[cc] = tp / static_cast<double>(col);

        const double pr = report.precision[cc] + report.recall[cc];
        if (pr == 0.0)
            report.f1_undefined[cc] = true;
        else
            report.f1[cc] = 2.0 * report.precision[cc] * report.recall[cc] / pr;
        f1_sum += report.f1[cc];
    }
    report.macro_f1 = f1_sum / static_cast<double>(kNumClasses);
    return report;
}

AucReport one_vs_rest_auc(const std::vector<Severity>& truth, const Eigen::MatrixXd& probs) {
    if (static_cast<std::size_t>(probs.rows()) != truth.size())
        throw ValueError("probability rows do not match the label count");
    AucReport report;
    const std::size_t n = truth.size();
    std::vector<std::pair<double, int>> scored(n);  // (score, is_positive)

    for (int c = 0; c < kNumClasses; ++c) {
        std::size_t n_pos = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool pos = to_int(truth[i]) == c;
            n_pos += pos ? 1 : 0;
            scored[i] = {probs(static_cast<Eigen::Index>(i), c), pos ? 1 : 0};
        }
        const std::size_t n_neg = n - n_pos;
        if (n_pos == 0 || n_neg == 0) {
            report.undefined[static_cast<std::size_t>(c)] = true;
            continue;
        }
        std::sort(scored.begin(), scored.end());
        // Rank-sum with midranks for ties.
        double rank_sum = 0.0;
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            std::size_t pos_in_block = 0;
            while (j < n && scored[j].first == scored[i].first) {
                pos_in_block += static_cast<std::size_t>(scored[j].second);
                ++j;
            }
            const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
            rank_sum += mid_rank * static_cast<double>(pos_in_block);
            i = j;
        }
        const double u = rank_sum - 0.5 * static_cast<double>(n_pos) *
                                        static_cast<double>(n_pos + 1);
        report.auc[static_cast<std::size_t>(c)] =
            u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
    }
    return report;
}

std::vector<Severity> predict_dataset(const Model& model, const CrashDataset& ds) {
    std::vector<int> cols;
    cols.reserve(model.feature_names.size());
    bool identity = static_cast<int>(model.feature_names.size()) == ds.cols();
    for (std::size_t i = 0; i < model.feature_names.size(); ++i) {
        const int j = ds.schema.index_of(model.feature_names[i]);
        if (j < 0)
            throw SchemaError("model consumes feature '" + model.feature_names[i] +
                              "' absent from the dataset");
        cols.push_back(j);
        identity = identity && j == static_cast<int>(i);
    }

    Eigen::MatrixXd probs;
    if (identity) {
        probs = model.predict_proba_batch(ds.X);
    } else {
        Eigen::MatrixXd projected(ds.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < cols.size(); ++i)
            projected.col(static_cast<Eigen::Index>(i)) = ds.X.col(cols[i]);
        probs = model.predict_proba_batch(projected);
    }

    std::vector<Severity> pred(static_cast<std::size_t>(ds.rows()));
    for (std::int64_t i = 0; i < ds.rows(); ++i)
        pred[static_cast<std::size_t>(i)] = static_cast<Severity>(argmax_row(probs, i));
    return pred;
}

EvaluationResult evaluate_model(const Model& model, const CrashDataset& test) {
    EvaluationResult result;
    result.cm = confusion(test.y, predict_dataset(model, test));
    result.normalized = normalize_rows(result.cm);
    result.metrics = metrics(result.cm);
    return result;
}

ComparisonReport compare_reduced_full(const CrashDataset& balanced_train,
                                      const CrashDataset& test, const GcRanking& ranking, int k,
                                      const TrainConfig& config) {
    ComparisonReport report;
    report.kind = config.kind;
    report.reduced_features = select_top_k(ranking, k);

    const Model full = train_model(balanced_train, config);
    const Model reduced =
        train_model(select_features(balanced_train, report.reduced_features), config);

    report.full = evaluate_model(full, test);
    report.reduced = evaluate_model(reduced, test);
    for (int c = 0; c < kNumClasses; ++c)
        report.recall_delta[static_cast<std::size_t>(c)] =
            report.reduced.metrics.recall[static_cast<std::size_t>(c)] -
            report.full.metrics.recall[static_cast<std::size_t>(c)];
    return report;
}

void save_metrics(const EvaluationResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write metrics file '" + path + "'");
    for (int i = 0; i < kNumClasses; ++i)
        for (int j = 0; j < kNumClasses; ++j)
            out << "count_" << severity_name(static_cast<Severity>(i)) << '_'
                << severity_name(static_cast<Severity>(j)) << '='
                << result.cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                << '\n';
    write_kv(out, "accuracy", result.metrics.accuracy);
    for (int c = 0; c < kNumClasses; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        const std::string name = severity_name(static_cast<Severity>(c));
        write_kv(out, ("recall_" + name).c_str(), result.metrics.recall[cc]);
        write_kv(out, ("precision_" + name).c_str(), result.metrics.precision[cc]);
        write_kv(out, ("f1_" + name).c_str(), result.metrics.f1[cc]);
    }
    write_kv(out, "macro_f1", result.metrics.macro_f1);
    for (int c = 0; c < kNumClasses; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        const std::string name = severity_name(static_cast<Severity>(c));
        if (result.metrics.recall_undefined[cc]) out << "recall_" << name << "_undefined=1\n";
        if (result.metrics.precision_undefined[cc])
            out << "precision_" << name << "_undefined=1\n";
        if (result.metrics.f1_undefined[cc]) out << "f1_" << name << "_undefined=1\n";
    }
    if (!result.normalized.empty_rows.empty()) {
        out << "empty_rows=";
        for (std::size_t i = 0; i < result.normalized.empty_rows.size(); ++i) {
            if (i) out << ',';
            out << severity_name(static_cast<Severity>(result.normalized.empty_rows[i]));
        }
        out << '\n';
    }
}

}  // namespace crashsev
