#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "crashsev/error.hpp"
#include "crashsev/evaluate.hpp"
#include "crashsev/model.hpp"
#include "crashsev/synthgen.hpp"
#include "support/tmpdir.hpp"

using namespace crashsev;

namespace {

SynthSpec small_spec() {
    SynthSpec spec;
    spec.n = 2000;
    spec.d = 5;
    spec.planted = {0, 2};
    spec.b = {1.0, 0.8};
    spec.lag = 2;
    spec.seed = 3;
    return spec;
}

}  // namespace

TEST_CASE("identical specs generate byte-identical data and truth") {
    const auto a = generate(small_spec());
    const auto b = generate(small_spec());
    CHECK(a.data.X == b.data.X);
    CHECK(a.data.y == b.data.y);
    CHECK(a.truth.threshold_lo == b.truth.threshold_lo);
    CHECK(a.truth.threshold_hi == b.truth.threshold_hi);

    auto shifted = small_spec();
    shifted.seed = 4;
    CHECK(generate(shifted).data.X != a.data.X);
}

TEST_CASE("class sizes follow the requested proportions exactly") {
    SynthSpec spec = small_spec();
    spec.n = 10000;
    spec.proportions = {0.69, 0.28, 0.03};
    const auto counts = generate(spec).data.class_counts();
    CHECK(counts[0] == 6900);
    CHECK(counts[1] == 2800);
    CHECK(counts[2] == 300);
}

TEST_CASE("threshold metadata brackets the class boundaries") {
    const auto result = generate(small_spec());
    CHECK(result.truth.threshold_lo < result.truth.threshold_hi);
    CHECK(result.truth.planted == std::vector<int>{0, 2});
    CHECK(result.truth.lag == 2);
}

TEST_CASE("spec validation rejects inconsistent recipes") {
    auto base = small_spec();

    auto s = base;
    s.planted = {};
    CHECK_THROWS_AS(generate(s), ValueError);

    s = base;
    s.planted = {0, 7};
    s.b = {1, 1};
    CHECK_THROWS_AS(generate(s), ValueError);

    s = base;
    s.planted = {0, 0};
    CHECK_THROWS_AS(generate(s), ValueError);

    s = base;
    s.b = {1.0};
    CHECK_THROWS_AS(generate(s), ValueError);

    s = base;
    s.proportions = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(generate(s), ValueError);

    s = base;
    s.lag = 0;
    CHECK_THROWS_AS(generate(s), ValueError);

    s = base;
    s.noise_sd = -1.0;
    CHECK_THROWS_AS(generate(s), ValueError);

    s = base;
    s.binary_fraction = 1.5;
    CHECK_THROWS_AS(generate(s), ValueError);

    // Proportions that round a class to zero rows.
    s = base;
    s.n = 100;
    s.proportions = {0.995, 0.004, 0.001};
    CHECK_THROWS_AS(generate(s), ValueError);
}

TEST_CASE("binary fraction makes the trailing features 0/1 chains") {
    SynthSpec spec = small_spec();
    spec.n = 5000;
    spec.d = 6;
    spec.binary_fraction = 0.5;
    const auto ds = generate(spec).data;

    for (int j = 0; j < 3; ++j) CHECK(ds.schema.at(j).kind == FeatureKind::kContinuous);
    for (int j = 3; j < 6; ++j) CHECK(ds.schema.at(j).kind == FeatureKind::kBinary);

    // Flip rate of the Markov chain.
    std::int64_t flips = 0;
    for (std::int64_t t = 1; t < ds.rows(); ++t)
        if (ds.X(t, 5) != ds.X(t - 1, 5)) ++flips;
    const double rate = static_cast<double>(flips) / static_cast<double>(ds.rows() - 1);
    CHECK(rate > 0.17);
    CHECK(rate < 0.23);

    // Continuous features sit near the stationary AR(1) spread.
    const double mean = ds.X.col(0).mean();
    const double sd = std::sqrt((ds.X.col(0).array() - mean).square().mean());
    CHECK(std::abs(mean) < 0.1);
    CHECK(sd > 1.0);
    CHECK(sd < 1.3);
}

TEST_CASE("labels lean on the lagged planted values, not the current ones") {
    SynthSpec spec;
    spec.n = 6000;
    spec.d = 4;
    spec.planted = {0};
    spec.b = {2.0};
    spec.lag = 2;
    spec.noise_sd = 0.3;
    spec.seed = 8;
    const auto ds = generate(spec).data;

    const auto corr_with_label = [&](int shift) {
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        std::int64_t m = 0;
        for (std::int64_t t = shift; t < ds.rows(); ++t) {
            const double x = ds.X(t - shift, 0);
            const double label = static_cast<double>(to_int(ds.y[static_cast<std::size_t>(t)]));
            sx += x;
            sy += label;
            sxx += x * x;
            syy += label * label;
            sxy += x * label;
            ++m;
        }
        const double num = sxy - sx * sy / static_cast<double>(m);
        const double den = std::sqrt((sxx - sx * sx / m) * (syy - sy * sy / m));
        return num / den;
    };

    const double lagged = corr_with_label(2);
    const double current = corr_with_label(0);
    CHECK(lagged > 0.3);
    CHECK(lagged > current + 0.1);
}

TEST_CASE("zero coefficients leave every feature uninformative") {
    SynthSpec spec;
    spec.n = 5000;
    spec.d = 4;
    spec.planted = {0};
    spec.b = {0.0};
    spec.lag = 2;
    spec.proportions = {0.6, 0.3, 0.1};
    spec.seed = 12;
    const auto ds = generate(spec).data;

    const auto split = split_train_test(ds, 0.8, 1);
    TrainConfig tc;
    tc.kind = LearnerKind::kDecisionTree;
    tc.tree.max_depth = 3;
    const auto model = train_model(split.train, tc);
    const auto eval = evaluate_model(model, split.test);
    // No feature carries signal, so nothing beats the majority rate for long.
    CHECK(std::abs(eval.metrics.accuracy - 0.6) < 0.06);
}

TEST_CASE("spec files load with defaults, broadcasting, and strict keys") {
    testsupport::TempDir tmp;
    {
        std::ofstream out(tmp.file("spec.json"));
        out << R"({"n": 1500, "d": 6, "planted": [1, 3, 4], "b": 1.25,
                   "lag": 3, "noise_sd": 0.7, "proportions": [0.5, 0.3, 0.2],
                   "binary_fraction": 0.5, "seed": 77})";
    }
    const auto spec = load_synth_spec(tmp.file("spec.json"));
    CHECK(spec.n == 1500);
    CHECK(spec.d == 6);
    CHECK(spec.planted == std::vector<int>{1, 3, 4});
    CHECK(spec.b == std::vector<double>{1.25, 1.25, 1.25});
    CHECK(spec.lag == 3);
    CHECK(spec.noise_sd == 0.7);
    CHECK(spec.proportions == std::array<double, 3>{0.5, 0.3, 0.2});
    CHECK(spec.binary_fraction == 0.5);
    CHECK(spec.seed == 77);

    {
        std::ofstream out(tmp.file("partial.json"));
        out << R"({"planted": [0], "b": [1.0]})";
    }
    const auto partial = load_synth_spec(tmp.file("partial.json"));
    CHECK(partial.n == 20000);
    CHECK(partial.d == 20);
    CHECK(partial.lag == 4);

    {
        std::ofstream out(tmp.file("unknown.json"));
        out << R"({"planted": [0], "b": 1, "strength": 2})";
    }
    CHECK_THROWS_WITH_AS(load_synth_spec(tmp.file("unknown.json")),
                         doctest::Contains("strength"), ParseError);

    {
        std::ofstream out(tmp.file("badprop.json"));
        out << R"({"proportions": [0.5, 0.5]})";
    }
    CHECK_THROWS_AS(load_synth_spec(tmp.file("badprop.json")), ParseError);

    {
        std::ofstream out(tmp.file("notjson.json"));
        out << "n = 5";
    }
    CHECK_THROWS_AS(load_synth_spec(tmp.file("notjson.json")), ParseError);
}

TEST_CASE("truth files round trip through their text form") {
    const auto result = generate(small_spec());
    testsupport::TempDir tmp;
    save_truth(result.truth, tmp.file("truth.txt"));

    std::ifstream in(tmp.file("truth.txt"));
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        REQUIRE(eq != std::string::npos);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    CHECK(kv.at("planted") == "0,2");
    CHECK(kv.at("lag") == "2");
    CHECK(std::stod(kv.at("threshold_lo")) == result.truth.threshold_lo);
    CHECK(std::stod(kv.at("threshold_hi")) == result.truth.threshold_hi);
}
