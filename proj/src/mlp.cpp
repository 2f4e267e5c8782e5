#include "crashsev/mlp.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "crashsev/error.hpp"
#include "crashsev/rng.hpp"

namespace crashsev {

namespace {

/// Activations per layer: a[0] is the (standardized) input, a[l] the
/// rectified output of hidden layer l; the head's logits and probabilities
/// are kept separately.
struct ForwardPass {
    std::vector<Eigen::MatrixXd> a;
    Eigen::MatrixXd logits;
    Eigen::MatrixXd probs;
};

ForwardPass run_forward(const MlpModel& model, const Eigen::MatrixXd& Xz) {
    if (Xz.cols() != model.layer_sizes.front())
        throw ValueError("input width " + std::to_string(Xz.cols()) + " does not match the model");
    const std::size_t n_layers = model.W.size();
    ForwardPass pass;
    pass.a.resize(n_layers);
    pass.a[0] = Xz;
    for (std::size_t l = 0; l + 1 < n_layers; ++l) {
        Eigen::MatrixXd z = pass.a[l] * model.W[l].transpose();
        z.rowwise() += model.b[l].transpose();
        pass.a[l + 1] = z.cwiseMax(0.0);
    }
    pass.logits = pass.a[n_layers - 1] * model.W[n_layers - 1].transpose();
    pass.logits.rowwise() += model.b[n_layers - 1].transpose();

    pass.probs.resize(pass.logits.rows(), pass.logits.cols());
    for (Eigen::Index i = 0; i < pass.logits.rows(); ++i) {
        const double m = pass.logits.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (pass.logits.row(i).array() - m).exp();
        pass.probs.row(i) = e / e.sum();
    }
    return pass;
}

double loss_of(const ForwardPass& pass, const std::vector<Severity>& y) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < pass.logits.rows(); ++i) {
        const double m = pass.logits.row(i).maxCoeff();
        const double lse = m + std::log((pass.logits.row(i).array() - m).exp().sum());
        loss += lse - pass.logits(i, to_int(y[static_cast<std::size_t>(i)]));
    }
    return loss / static_cast<double>(pass.logits.rows());
}

MlpGradients grads_of(const MlpModel& model, const ForwardPass& pass,
                      const std::vector<Severity>& y) {
    const std::size_t n_layers = model.W.size();
    const double batch = static_cast<double>(pass.logits.rows());

    MlpGradients grads;
    grads.dW.resize(n_layers);
    grads.db.resize(n_layers);

    Eigen::MatrixXd dz = pass.probs;
    for (Eigen::Index i = 0; i < dz.rows(); ++i)
        dz(i, to_int(y[static_cast<std::size_t>(i)])) -= 1.0;
    dz /= batch;

    for (std::size_t l = n_layers; l-- > 0;) {
        grads.dW[l] = dz.transpose() * pass.a[l];
        grads.db[l] = dz.colwise().sum().transpose();
        if (l > 0) {
            const Eigen::MatrixXd da = dz * model.W[l];
            // max(z,0) is positive exactly where z is, so the stored
            // activation doubles as the rectifier mask.
            dz = da.cwiseProduct((pass.a[l].array() > 0.0).cast<double>().matrix());
        }
    }
    return grads;
}

}  // namespace

Eigen::MatrixXd MlpModel::forward(const Eigen::MatrixXd& X) const {
    return run_forward(*this, standardizer.transform(X)).probs;
}

Eigen::Vector3d MlpModel::predict_proba(const Eigen::VectorXd& x) const {
    return forward(x.transpose()).row(0).transpose();
}

MlpModel init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw ConfigError("a network needs input and output layers");
    for (int s : layer_sizes)
        if (s < 1) throw ConfigError("layer sizes must be positive");
    if (layer_sizes.back() != kNumClasses)
        throw ConfigError("output layer must have " + std::to_string(kNumClasses) + " units");

    MlpModel model;
    model.layer_sizes = layer_sizes;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        Eigen::MatrixXd W(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) W(r, c) = rng.uniform(-limit, limit);
        model.W.push_back(std::move(W));
        model.b.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    model.standardizer.mean = Eigen::VectorXd::Zero(layer_sizes.front());
    model.standardizer.sd = Eigen::VectorXd::Ones(layer_sizes.front());
    return model;
}

double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& Xz, const std::vector<Severity>& y) {
    return loss_of(run_forward(model, Xz), y);
}

MlpGradients mlp_gradients(const MlpModel& model, const Eigen::MatrixXd& Xz,
                           const std::vector<Severity>& y) {
    return grads_of(model, run_forward(model, Xz), y);
}

MlpModel mlp_train(const CrashDataset& train, const MlpConfig& config, std::uint64_t seed) {
    if (train.lineage == Lineage::kTest) throw ConfigError("refusing to train on a test split");
    if (train.rows() < 1) throw ValueError("empty training set");
    if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (config.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");

    std::vector<int> layer_sizes;
    layer_sizes.push_back(train.cols());
    layer_sizes.insert(layer_sizes.end(), config.hidden.begin(), config.hidden.end());
    layer_sizes.push_back(kNumClasses);

    MlpModel model = init_mlp(layer_sizes, derive_seed(seed, "init"));
    model.config = config;
    model.standardizer.fit(train.X);
    const Eigen::MatrixXd Xz = model.standardizer.transform(train.X);

    const std::size_t n_layers = model.W.size();
    std::vector<Eigen::MatrixXd> mW(n_layers), vW(n_layers);
    std::vector<Eigen::VectorXd> mb(n_layers), vb(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        mW[l] = Eigen::MatrixXd::Zero(model.W[l].rows(), model.W[l].cols());
        vW[l] = mW[l];
        mb[l] = Eigen::VectorXd::Zero(model.b[l].size());
        vb[l] = mb[l];
    }

    const std::int64_t n = train.rows();
    const std::int64_t batch_size = std::min<std::int64_t>(config.batch_size, n);
    std::vector<std::int64_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);

    long step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(seed, "epoch:" + std::to_string(epoch)));
        shuffle_rng.shuffle(perm);

        for (std::int64_t start = 0; start < n; start += batch_size) {
            const std::int64_t bs = std::min(batch_size, n - start);
            Eigen::MatrixXd Xb(bs, train.cols());
            std::vector<Severity> yb(static_cast<std::size_t>(bs));
            for (std::int64_t i = 0; i < bs; ++i) {
                const std::int64_t r = perm[static_cast<std::size_t>(start + i)];
                Xb.row(i) = Xz.row(r);
                yb[static_cast<std::size_t>(i)] = train.y[static_cast<std::size_t>(r)];
            }

            const ForwardPass pass = run_forward(model, Xb);
            const double loss = loss_of(pass, yb);
            if (!std::isfinite(loss))
                throw DivergenceError("loss diverged at epoch " + std::to_string(epoch) +
                                      " with learning rate " +
                                      std::to_string(config.learning_rate));
            const MlpGradients grads = grads_of(model, pass, yb);

            ++step;
            const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
            for (std::size_t l = 0; l < n_layers; ++l) {
                mW[l] = config.beta1 * mW[l] + (1.0 - config.beta1) * grads.dW[l];
                vW[l] = config.beta2 * vW[l] +
                        (1.0 - config.beta2) * grads.dW[l].cwiseProduct(grads.dW[l]);
                model.W[l] -= config.learning_rate *
                              (mW[l] / bc1)
                                  .cwiseQuotient(((vW[l] / bc2).cwiseSqrt().array() +
                                                  config.epsilon)
                                                     .matrix());
                mb[l] = config.beta1 * mb[l] + (1.0 - config.beta1) * grads.db[l];
                vb[l] = config.beta2 * vb[l] +
                        (1.0 - config.beta2) * grads.db[l].cwiseProduct(grads.db[l]);
                model.b[l] -= config.learning_rate *
                              (mb[l] / bc1)
                                  .cwiseQuotient(((vb[l] / bc2).cwiseSqrt().array() +
                                                  config.epsilon)
                                                     .matrix());
            }
        }
    }
    return model;
}

}  // namespace crashsev
