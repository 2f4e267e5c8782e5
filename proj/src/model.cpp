#include "crashsev/model.hpp"

#include <cstring>
#include <fstream>

#include "crashsev/error.hpp"

namespace crashsev {

namespace {

constexpr char kMagic[8] = {'C', 'S', 'E', 'V', 'M', 'D', 'L', '\x01'};

// ---- little-endian primitives ------------------------------------------

template <typename T>
void write_raw(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw ParseError("model file truncated");
    return value;
}

void write_string(std::ostream& out, const std::string& s) {
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const auto len = read_raw<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    if (!in) throw ParseError("model file truncated");
    return s;
}

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) write_raw<double>(out, v(i));
}

Eigen::VectorXd read_vector(std::istream& in) {
    const auto n = read_raw<std::uint64_t>(in);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = read_raw<double>(in);
    return v;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) write_raw<double>(out, m(r, c));
}

Eigen::MatrixXd read_matrix(std::istream& in) {
    const auto rows = read_raw<std::uint64_t>(in);
    const auto cols = read_raw<std::uint64_t>(in);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = read_raw<double>(in);
    return m;
}

// ---- per-kind payloads -------------------------------------------------

void write_tree(std::ostream& out, const DecisionTreeModel& tree) {
    write_raw<std::int32_t>(out, tree.config.max_depth);
    write_raw<std::int32_t>(out, tree.config.min_samples_split);
    write_raw<std::int32_t>(out, tree.config.features_per_split);
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(tree.nodes.size()));
    for (const TreeNode& n : tree.nodes) {
        write_raw<std::int32_t>(out, n.feature);
        write_raw<double>(out, n.threshold);
        write_raw<std::int32_t>(out, n.left);
        write_raw<std::int32_t>(out, n.right);
        for (auto c : n.counts) write_raw<std::int64_t>(out, c);
    }
}

DecisionTreeModel read_tree(std::istream& in) {
    DecisionTreeModel tree;
    tree.config.max_depth = read_raw<std::int32_t>(in);
    tree.config.min_samples_split = read_raw<std::int32_t>(in);
    tree.config.features_per_split = read_raw<std::int32_t>(in);
    const auto count = read_raw<std::uint64_t>(in);
    tree.nodes.resize(count);
    for (TreeNode& n : tree.nodes) {
        n.feature = read_raw<std::int32_t>(in);
        n.threshold = read_raw<double>(in);
        n.left = read_raw<std::int32_t>(in);
        n.right = read_raw<std::int32_t>(in);
        for (auto& c : n.counts) c = read_raw<std::int64_t>(in);
    }
    return tree;
}

void write_forest(std::ostream& out, const RandomForestModel& forest) {
    write_raw<std::int32_t>(out, forest.config.n_estimators);
    write_raw<std::int32_t>(out, forest.config.max_depth);
    write_raw<std::int32_t>(out, forest.config.min_samples_split);
    write_raw<std::int32_t>(out, forest.config.features_per_split);
    write_raw<std::uint8_t>(out, forest.config.bootstrap ? 1 : 0);
    write_raw<std::uint64_t>(out, forest.seed);
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(forest.trees.size()));
    for (const auto& tree : forest.trees) write_tree(out, tree);
}

RandomForestModel read_forest(std::istream& in) {
    RandomForestModel forest;
    forest.config.n_estimators = read_raw<std::int32_t>(in);
    forest.config.max_depth = read_raw<std::int32_t>(in);
    forest.config.min_samples_split = read_raw<std::int32_t>(in);
    forest.config.features_per_split = read_raw<std::int32_t>(in);
    forest.config.bootstrap = read_raw<std::uint8_t>(in) != 0;
    forest.seed = read_raw<std::uint64_t>(in);
    const auto count = read_raw<std::uint64_t>(in);
    forest.trees.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) forest.trees.push_back(read_tree(in));
    return forest;
}

void write_boost(std::ostream& out, const BoostModel& model) {
    write_raw<std::int32_t>(out, model.config.rounds);
    write_raw<double>(out, model.config.eta);
    write_raw<double>(out, model.config.lambda);
    write_raw<double>(out, model.config.gamma);
    write_raw<std::int32_t>(out, model.config.max_depth);
    write_raw<double>(out, model.config.min_child_hessian);
    write_raw<double>(out, model.base_score);
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(model.train_loss.size()));
    for (double v : model.train_loss) write_raw<double>(out, v);
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(model.rounds.size()));
    for (const auto& round : model.rounds) {
        for (const RegTree& tree : round) {
            write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(tree.nodes.size()));
            for (const RegTreeNode& n : tree.nodes) {
                write_raw<std::int32_t>(out, n.feature);
                write_raw<double>(out, n.threshold);
                write_raw<std::int32_t>(out, n.left);
                write_raw<std::int32_t>(out, n.right);
                write_raw<double>(out, n.weight);
            }
        }
    }
}

BoostModel read_boost(std::istream& in) {
    BoostModel model;
    model.config.rounds = read_raw<std::int32_t>(in);
    model.config.eta = read_raw<double>(in);
    model.config.lambda = read_raw<double>(in);
    model.config.gamma = read_raw<double>(in);
    model.config.max_depth = read_raw<std::int32_t>(in);
    model.config.min_child_hessian = read_raw<double>(in);
    model.base_score = read_raw<double>(in);
    const auto loss_count = read_raw<std::uint64_t>(in);
    model.train_loss.resize(loss_count);
    for (double& v : model.train_loss) v = read_raw<double>(in);
    const auto round_count = read_raw<std::uint64_t>(in);
    model.rounds.resize(round_count);
    for (auto& round : model.rounds) {
        for (RegTree& tree : round) {
            const auto node_count = read_raw<std::uint64_t>(in);
            tree.nodes.resize(node_count);
            for (RegTreeNode& n : tree.nodes) {
                n.feature = read_raw<std::int32_t>(in);
                n.threshold = read_raw<double>(in);
                n.left = read_raw<std::int32_t>(in);
                n.right = read_raw<std::int32_t>(in);
                n.weight = read_raw<double>(in);
            }
        }
    }
    return model;
}

void write_mlp(std::ostream& out, const MlpModel& model) {
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(model.layer_sizes.size()));
    for (int s : model.layer_sizes) write_raw<std::int32_t>(out, s);
    write_vector(out, model.standardizer.mean);
    write_vector(out, model.standardizer.sd);
    for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
        write_matrix(out, model.W[l]);
        write_vector(out, model.b[l]);
    }
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(model.config.hidden.size()));
    for (int s : model.config.hidden) write_raw<std::int32_t>(out, s);
    write_raw<std::int32_t>(out, model.config.epochs);
    write_raw<std::int32_t>(out, model.config.batch_size);
    write_raw<double>(out, model.config.learning_rate);
    write_raw<double>(out, model.config.beta1);
    write_raw<double>(out, model.config.beta2);
    write_raw<double>(out, model.config.epsilon);
}

MlpModel read_mlp(std::istream& in) {
    MlpModel model;
    const auto n_sizes = read_raw<std::uint32_t>(in);
    model.layer_sizes.resize(n_sizes);
    for (int& s : model.layer_sizes) s = read_raw<std::int32_t>(in);
    model.standardizer.mean = read_vector(in);
    model.standardizer.sd = read_vector(in);
    for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
        model.W.push_back(read_matrix(in));
        model.b.push_back(read_vector(in));
    }
    const auto n_hidden = read_raw<std::uint32_t>(in);
    model.config.hidden.resize(n_hidden);
    for (int& s : model.config.hidden) s = read_raw<std::int32_t>(in);
    model.config.epochs = read_raw<std::int32_t>(in);
    model.config.batch_size = read_raw<std::int32_t>(in);
    model.config.learning_rate = read_raw<double>(in);
    model.config.beta1 = read_raw<double>(in);
    model.config.beta2 = read_raw<double>(in);
    model.config.epsilon = read_raw<double>(in);
    return model;
}

}  // namespace

const char* learner_name(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::kDecisionTree: return "dt";
        case LearnerKind::kRandomForest: return "rf";
        case LearnerKind::kGradientBoost: return "xgb";
        case LearnerKind::kMlp: return "dnn";
    }
    throw ValueError("unknown learner kind");
}

LearnerKind learner_from_name(const std::string& name) {
    if (name == "dt") return LearnerKind::kDecisionTree;
    if (name == "rf") return LearnerKind::kRandomForest;
    if (name == "xgb") return LearnerKind::kGradientBoost;
    if (name == "dnn") return LearnerKind::kMlp;
    throw ValueError("unknown learner '" + name + "' (expected dt, rf, xgb or dnn)");
}

Eigen::Vector3d Model::predict_proba(const Eigen::VectorXd& x) const {
    return std::visit([&](const auto& m) { return m.predict_proba(x); }, impl);
}

Eigen::MatrixXd Model::predict_proba_batch(const Eigen::MatrixXd& X) const {
    if (const auto* mlp = std::get_if<MlpModel>(&impl)) return mlp->forward(X);
    Eigen::MatrixXd probs(X.rows(), kNumClasses);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        probs.row(i) = predict_proba(X.row(i).transpose()).transpose();
    return probs;
}

Severity Model::predict(const Eigen::VectorXd& x) const {
    const Eigen::Vector3d p = predict_proba(x);
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (p(c) > p(best)) best = c;
    return static_cast<Severity>(best);
}

Model train_model(const CrashDataset& train, const TrainConfig& config) {
    Model model;
    model.feature_names = train.schema.names();
    switch (config.kind) {
        case LearnerKind::kDecisionTree:
            model.impl = train_decision_tree(train, config.tree, config.seed);
            break;
        case LearnerKind::kRandomForest:
            model.impl = train_random_forest(train, config.forest, config.seed);
            break;
        case LearnerKind::kGradientBoost:
            model.impl = train_gradient_boost(train, config.boost);
            break;
        case LearnerKind::kMlp:
            model.impl = mlp_train(train, config.mlp, config.seed);
            break;
    }
    return model;
}

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model file '" + path + "'");
    out.write(kMagic, sizeof(kMagic));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(model.kind()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(model.feature_names.size()));
    for (const auto& name : model.feature_names) write_string(out, name);
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DecisionTreeModel>) write_tree(out, m);
            else if constexpr (std::is_same_v<T, RandomForestModel>) write_forest(out, m);
            else if constexpr (std::is_same_v<T, BoostModel>) write_boost(out, m);
            else write_mlp(out, m);
        },
        model.impl);
    if (!out) throw Error("failed while writing model file '" + path + "'");
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ParseError("'" + path + "' is not a model file of a supported version");

    Model model;
    const auto kind = read_raw<std::uint32_t>(in);
    const auto n_names = read_raw<std::uint32_t>(in);
    model.feature_names.reserve(n_names);
    for (std::uint32_t i = 0; i < n_names; ++i) model.feature_names.push_back(read_string(in));

    switch (static_cast<LearnerKind>(kind)) {
        case LearnerKind::kDecisionTree: model.impl = read_tree(in); break;
        case LearnerKind::kRandomForest: model.impl = read_forest(in); break;
        case LearnerKind::kGradientBoost: model.impl = read_boost(in); break;
        case LearnerKind::kMlp: model.impl = read_mlp(in); break;
        default: throw ParseError("model file holds an unknown learner kind");
    }
    return model;
}

}  // namespace crashsev
