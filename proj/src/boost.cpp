#include "crashsev/boost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "crashsev/error.hpp"
#include "crashsev/parallel.hpp"

namespace crashsev {

namespace {

struct RegSplit {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

struct RegGrower {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& g;
    const Eigen::VectorXd& h;
    const BoostConfig& config;
    std::vector<RegTreeNode> nodes;

    std::optional<RegSplit> find_split(const std::vector<std::int64_t>& rows, double G, double H) {
        const std::int64_t n = static_cast<std::int64_t>(rows.size());
        if (n < 2) return std::nullopt;
        const double lambda = config.lambda;
        const double parent = G * G / (H + lambda);

        std::optional<RegSplit> best;
        std::vector<std::pair<double, std::int64_t>> values(static_cast<std::size_t>(n));
        for (int f = 0; f < X.cols(); ++f) {
            for (std::size_t i = 0; i < values.size(); ++i)
                values[i] = {X(rows[i], f), rows[i]};
            std::sort(values.begin(), values.end());

            double GL = 0.0, HL = 0.0;
            for (std::int64_t i = 0; i + 1 < n; ++i) {
                const std::int64_t r = values[static_cast<std::size_t>(i)].second;
                GL += g(r);
                HL += h(r);
                const double lo = values[static_cast<std::size_t>(i)].first;
                const double hi = values[static_cast<std::size_t>(i + 1)].first;
                if (lo == hi) continue;
                const double mid = (lo + hi) / 2.0;
                if (mid >= hi) continue;
                const double GR = G - GL;
                const double HR = H - HL;
                if (HL < config.min_child_hessian || HR < config.min_child_hessian) continue;
                const double gain =
                    0.5 * (GL * GL / (HL + lambda) + GR * GR / (HR + lambda) - parent) -
                    config.gamma;
                if (gain <= 0.0) continue;
                if (!best || gain > best->gain ||
                    (gain == best->gain &&
                     (f < best->feature || (f == best->feature && mid < best->threshold)))) {
                    best = RegSplit{f, mid, gain};
                }
            }
        }
        return best;
    }

    int build(std::vector<std::int64_t>& rows, int depth) {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();

        double G = 0.0, H = 0.0;
        for (std::int64_t i : rows) {
            G += g(i);
            H += h(i);
        }
        nodes[static_cast<std::size_t>(id)].weight = -G / (H + config.lambda);

        if (depth >= config.max_depth) return id;
        const auto split = find_split(rows, G, H);
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
        RegTreeNode& node = nodes[static_cast<std::size_t>(id)];
        node.feature = split->feature;
        node.threshold = split->threshold;
        node.left = left;
        node.right = right;
        return id;
    }
};

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores) {
    Eigen::MatrixXd p(scores.rows(), scores.cols());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double m = scores.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (scores.row(i).array() - m).exp();
        p.row(i) = e / e.sum();
    }
    return p;
}

double mean_log_loss(const Eigen::MatrixXd& scores, const std::vector<Severity>& y) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double m = scores.row(i).maxCoeff();
        const double lse = m + std::log((scores.row(i).array() - m).exp().sum());
        loss += lse - scores(i, to_int(y[static_cast<std::size_t>(i)]));
    }
    return loss / static_cast<double>(scores.rows());
}

}  // namespace

double RegTree::value_of(const Eigen::VectorXd& x) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const RegTreeNode& node = nodes[static_cast<std::size_t>(id)];
        id = x(node.feature) <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(id)].weight;
}

Eigen::Vector3d BoostModel::scores_of(const Eigen::VectorXd& x) const {
    Eigen::Vector3d s = Eigen::Vector3d::Constant(base_score);
    for (const auto& round : rounds)
        for (int c = 0; c < kNumClasses; ++c)
            s(c) += config.eta * round[static_cast<std::size_t>(c)].value_of(x);
    return s;
}

Eigen::Vector3d BoostModel::predict_proba(const Eigen::VectorXd& x) const {
    const Eigen::Vector3d s = scores_of(x);
    const double m = s.maxCoeff();
    const Eigen::Vector3d e = (s.array() - m).exp();
    return e / e.sum();
}

BoostModel train_gradient_boost(const CrashDataset& train, const BoostConfig& config) {
    if (train.lineage == Lineage::kTest) throw ConfigError("refusing to train on a test split");
    if (train.rows() < 2) throw ValueError("need at least two rows to train");
    if (config.rounds < 0) throw ConfigError("rounds must be >= 0");
    if (config.max_depth < 0) throw ConfigError("max_depth must be >= 0");

    const std::int64_t n = train.rows();
    BoostModel model;
    model.config = config;

    Eigen::MatrixXd scores = Eigen::MatrixXd::Constant(n, kNumClasses, model.base_score);
    model.train_loss.push_back(mean_log_loss(scores, train.y));

    for (int round = 0; round < config.rounds; ++round) {
        const Eigen::MatrixXd p = softmax_rows(scores);
        std::array<RegTree, kNumClasses> trees;
        parallel_for(
            kNumClasses,
            [&](std::size_t c) {
                Eigen::VectorXd g(n), h(n);
                for (std::int64_t i = 0; i < n; ++i) {
                    const double pic = p(i, static_cast<Eigen::Index>(c));
                    g(i) = pic - (to_int(train.y[static_cast<std::size_t>(i)]) ==
                                          static_cast<int>(c)
                                      ? 1.0
                                      : 0.0);
                    h(i) = pic * (1.0 - pic);
                }
                RegGrower grower{train.X, g, h, config, {}};
                std::vector<std::int64_t> rows(static_cast<std::size_t>(n));
                std::iota(rows.begin(), rows.end(), 0);
                grower.build(rows, 0);
                trees[c].nodes = std::move(grower.nodes);
            },
            config.n_threads);

        for (int c = 0; c < kNumClasses; ++c)
            for (std::int64_t i = 0; i < n; ++i)
                scores(i, c) += config.eta * trees[static_cast<std::size_t>(c)].value_of(
                                                 train.X.row(i).transpose());
        model.rounds.push_back(std::move(trees));
        model.train_loss.push_back(mean_log_loss(scores, train.y));
    }
    return model;
}

double boost_log_loss(const BoostModel& model, const CrashDataset& ds) {
    Eigen::MatrixXd scores(ds.rows(), kNumClasses);
    for (std::int64_t i = 0; i < ds.rows(); ++i)
        scores.row(i) = model.scores_of(ds.X.row(i).transpose()).transpose();
    return mean_log_loss(scores, ds.y);
}

}  // namespace crashsev
