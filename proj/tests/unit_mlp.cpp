#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "crashsev/error.hpp"
#include "crashsev/mlp.hpp"
#include "crashsev/rng.hpp"
#include "support/blobs.hpp"

using namespace crashsev;

namespace {

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd random_matrix(std::int64_t n, int d, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd X(n, d);
    for (std::int64_t i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) X(i, j) = rng.normal();
    return X;
}

}  // namespace

TEST_CASE("initialization draws bounded weights and zero biases") {
    const auto model = init_mlp({5, 7, 3}, 42);
    CHECK(model.layer_sizes == std::vector<int>{5, 7, 3});
    REQUIRE(model.W.size() == 2);
    REQUIRE(model.b.size() == 2);
    CHECK(model.W[0].rows() == 7);
    CHECK(model.W[0].cols() == 5);
    CHECK(model.W[1].rows() == 3);
    CHECK(model.W[1].cols() == 7);
    CHECK(model.b[0].isZero(0.0));
    CHECK(model.b[1].isZero(0.0));
    CHECK(model.W[0].cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 5.0));
    CHECK(model.W[1].cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 7.0));
    CHECK(model.W[0].cwiseAbs().maxCoeff() > 0.0);

    const auto again = init_mlp({5, 7, 3}, 42);
    CHECK(max_abs_diff(model.W[0], again.W[0]) == 0.0);
    const auto other = init_mlp({5, 7, 3}, 43);
    CHECK(max_abs_diff(model.W[0], other.W[0]) > 0.0);

    CHECK_THROWS_AS(init_mlp({3}, 1), ConfigError);
    CHECK_THROWS_AS(init_mlp({3, 0, 3}, 1), ConfigError);
    CHECK_THROWS_AS(init_mlp({3, 4, 4}, 1), ConfigError);
}

TEST_CASE("forward output rows live on the probability simplex") {
    const auto model = init_mlp({4, 6, 3}, 7);
    const Eigen::MatrixXd X = random_matrix(20, 4, 1);
    const Eigen::MatrixXd P = model.forward(X);
    REQUIRE(P.rows() == 20);
    REQUIRE(P.cols() == 3);
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        CHECK(std::abs(P.row(i).sum() - 1.0) < 1e-12);
        CHECK(P.row(i).minCoeff() >= 0.0);
    }
    const Eigen::Vector3d p = model.predict_proba(X.row(3).transpose());
    CHECK((p.transpose() - P.row(3)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("zeroed weights predict the uniform distribution") {
    auto model = init_mlp({4, 6, 3}, 7);
    for (auto& W : model.W) W.setZero();
    const Eigen::MatrixXd P = model.forward(random_matrix(5, 4, 2));
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index c = 0; c < 3; ++c) CHECK(P(i, c) == 1.0 / 3.0);
}

TEST_CASE("saturated logits stay finite through log-sum-exp") {
    auto model = init_mlp({3, 3}, 1);
    model.W[0] = Eigen::MatrixXd::Identity(3, 3);
    Eigen::MatrixXd X(1, 3);
    X << 1000.0, 0.0, -1000.0;

    const Eigen::MatrixXd P = model.forward(X);
    CHECK(P(0, 0) > 0.999);
    CHECK(std::isfinite(P.sum()));

    CHECK(mlp_loss(model, X, {Severity::kPdo}) == 0.0);  // exp(-1000) underflows
    CHECK(mlp_loss(model, X, {Severity::kKa}) == doctest::Approx(2000.0));
}

TEST_CASE("a width mismatch is rejected") {
    const auto model = init_mlp({4, 6, 3}, 7);
    CHECK_THROWS_AS(model.forward(random_matrix(5, 3, 1)), ValueError);
    CHECK_THROWS_AS(mlp_loss(model, random_matrix(5, 5, 1), std::vector<Severity>(5, Severity::kPdo)),
                    ValueError);
}

TEST_CASE("backpropagation matches central differences") {
    const auto model = init_mlp({3, 4, 3}, 11);
    const Eigen::MatrixXd X = random_matrix(8, 3, 5);
    std::vector<Severity> y;
    for (int i = 0; i < 8; ++i) y.push_back(static_cast<Severity>(i % 3));

    const auto analytic = mlp_gradients(model, X, y);
    REQUIRE(analytic.dW.size() == 2);
    REQUIRE(analytic.db.size() == 2);

    const double h = 1e-5;
    double worst = 0.0;
    auto probe = [&](auto&& access) {
        auto plus = model;
        access(plus) += h;
        auto minus = model;
        access(minus) -= h;
        return (mlp_loss(plus, X, y) - mlp_loss(minus, X, y)) / (2.0 * h);
    };
    for (std::size_t l = 0; l < model.W.size(); ++l) {
        for (Eigen::Index r = 0; r < model.W[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < model.W[l].cols(); ++c) {
                const double fd = probe([&](MlpModel& m) -> double& { return m.W[l](r, c); });
                const double a = analytic.dW[l](r, c);
                worst = std::max(worst, std::abs(a - fd) / std::max(1e-6, std::abs(a) + std::abs(fd)));
            }
        }
        for (Eigen::Index r = 0; r < model.b[l].size(); ++r) {
            const double fd = probe([&](MlpModel& m) -> double& { return m.b[l](r); });
            const double a = analytic.db[l](r);
            worst = std::max(worst, std::abs(a - fd) / std::max(1e-6, std::abs(a) + std::abs(fd)));
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("gradients at zero weights reduce to a closed form") {
    auto model = init_mlp({2, 4, 3}, 3);
    for (auto& W : model.W) W.setZero();
    const Eigen::MatrixXd X = random_matrix(3, 2, 9);
    // Uniform probabilities and dead rectifier units: only the output bias
    // feels the class frequencies.
    const std::vector<Severity> y = {Severity::kPdo, Severity::kPdo, Severity::kBc};
    const auto grads = mlp_gradients(model, X, y);
    CHECK(grads.dW[0].isZero(1e-15));
    CHECK(grads.dW[1].isZero(1e-15));
    CHECK(grads.db[0].isZero(1e-15));
    CHECK(grads.db[1](0) == doctest::Approx(1.0 / 3 - 2.0 / 3).epsilon(1e-12));
    CHECK(grads.db[1](1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(grads.db[1](2) == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("training separates well-spaced clusters") {
    const auto ds = testsupport::make_blobs(600, 2, 21);
    MlpConfig config;
    config.hidden = {8, 8};
    config.epochs = 150;
    config.batch_size = 64;
    const auto model = mlp_train(ds, config, 3);
    CHECK(model.layer_sizes == std::vector<int>{2, 8, 8, 3});

    const Eigen::MatrixXd P = model.forward(ds.X);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < ds.rows(); ++i) {
        Eigen::Index arg;
        P.row(i).maxCoeff(&arg);
        if (static_cast<int>(arg) == to_int(ds.y[static_cast<std::size_t>(i)])) ++hits;
    }
    CHECK(static_cast<double>(hits) / static_cast<double>(ds.rows()) > 0.95);
}

TEST_CASE("the standardizer is fitted on the training split") {
    const auto ds = testsupport::make_blobs(200, 3, 22);
    MlpConfig config;
    config.hidden = {4};
    config.epochs = 2;
    config.batch_size = 64;
    const auto model = mlp_train(ds, config, 4);
    REQUIRE(model.standardizer.mean.size() == 3);
    for (int j = 0; j < 3; ++j) {
        const double mean = ds.X.col(j).mean();
        const double sd = std::sqrt((ds.X.col(j).array() - mean).square().sum() /
                                    static_cast<double>(ds.rows()));
        CHECK(model.standardizer.mean(j) == doctest::Approx(mean).epsilon(1e-12));
        CHECK(model.standardizer.sd(j) == doctest::Approx(sd).epsilon(1e-12));
    }
}

TEST_CASE("training is deterministic in the seed") {
    const auto ds = testsupport::make_blobs(150, 2, 23);
    MlpConfig config;
    config.hidden = {6};
    config.epochs = 5;
    config.batch_size = 32;
    const auto a = mlp_train(ds, config, 7);
    const auto b = mlp_train(ds, config, 7);
    CHECK(max_abs_diff(a.W[0], b.W[0]) == 0.0);
    CHECK(max_abs_diff(a.W[1], b.W[1]) == 0.0);
    CHECK((a.b[1] - b.b[1]).cwiseAbs().maxCoeff() == 0.0);

    const auto c = mlp_train(ds, config, 8);
    CHECK(max_abs_diff(a.W[0], c.W[0]) > 0.0);
}

TEST_CASE("a non-finite loss raises a divergence error") {
    Eigen::MatrixXd X(4, 2);
    for (int i = 0; i < 4; ++i) {
        X(i, 0) = 1.7e308;  // column mean overflows, poisoning the z-scores
        X(i, 1) = static_cast<double>(i);
    }
    const auto ds = make_dataset(FeatureSchema({{"a", FeatureKind::kContinuous, ""},
                                                {"b", FeatureKind::kContinuous, ""}}),
                                 X, {Severity::kPdo, Severity::kBc, Severity::kKa, Severity::kPdo});
    MlpConfig config;
    config.hidden = {4};
    config.epochs = 3;
    config.batch_size = 4;
    CHECK_THROWS_WITH_AS(mlp_train(ds, config, 1),
                         doctest::Contains("diverged at epoch"), DivergenceError);
}

TEST_CASE("training validates config and lineage") {
    const auto ds = testsupport::make_blobs(30, 2, 24);
    MlpConfig config;
    config.hidden = {4};
    config.epochs = 1;

    auto bad = config;
    bad.epochs = 0;
    CHECK_THROWS_AS(mlp_train(ds, bad, 1), ConfigError);
    bad = config;
    bad.batch_size = 0;
    CHECK_THROWS_AS(mlp_train(ds, bad, 1), ConfigError);
    bad = config;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(mlp_train(ds, bad, 1), ConfigError);

    auto test_split = ds;
    test_split.lineage = Lineage::kTest;
    CHECK_THROWS_AS(mlp_train(test_split, config, 1), ConfigError);

    auto empty = ds;
    empty.X.resize(0, 2);
    empty.y.clear();
    empty.order_key.clear();
    empty.synthetic.clear();
    CHECK_THROWS_AS(mlp_train(empty, config, 1), ValueError);
}

TEST_CASE("oversized batches are clamped to the split") {
    const auto ds = testsupport::make_blobs(50, 2, 25);
    MlpConfig config;
    config.hidden = {};
    config.epochs = 3;
    config.batch_size = 10000;
    const auto model = mlp_train(ds, config, 5);
    CHECK(model.layer_sizes == std::vector<int>{2, 3});
    const Eigen::MatrixXd P = model.forward(ds.X);
    CHECK(std::abs(P.row(0).sum() - 1.0) < 1e-12);
}
