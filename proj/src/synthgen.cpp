#include "crashsev/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "crashsev/error.hpp"
#include "crashsev/format.hpp"
#include "crashsev/rng.hpp"

namespace crashsev {

namespace {

constexpr double kArPersistence = 0.5;
constexpr double kFlipProb = 0.2;
constexpr double kScorePersistence = 0.3;

std::string feature_name(int j) { return "f" + std::to_string(j); }

}  // namespace

void validate_spec(const SynthSpec& spec) {
    if (spec.d < 1) throw ValueError("need at least one feature");
    if (spec.lag < 1) throw ValueError("lag must be >= 1");
    if (spec.n <= 10 * spec.lag)
        throw ValueError("need more than " + std::to_string(10 * spec.lag) + " rows for lag " +
                         std::to_string(spec.lag));
    if (spec.planted.empty()) throw ValueError("planted set is empty");
    std::set<int> seen;
    for (int j : spec.planted) {
        if (j < 0 || j >= spec.d)
            throw ValueError("planted index " + std::to_string(j) + " out of range");
        if (!seen.insert(j).second)
            throw ValueError("planted index " + std::to_string(j) + " repeated");
    }
    if (spec.b.size() != spec.planted.size())
        throw ValueError("coefficient count does not match the planted set");
    double sum = 0.0;
    for (double p : spec.proportions) {
        if (p <= 0.0) throw ValueError("class proportions must be positive");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValueError("class proportions must sum to 1");
    if (spec.binary_fraction < 0.0 || spec.binary_fraction > 1.0)
        throw ValueError("binary_fraction must lie in [0,1]");
    if (spec.noise_sd < 0.0) throw ValueError("noise_sd must be non-negative");
}

SynthResult generate(const SynthSpec& spec) {
    validate_spec(spec);
    const std::int64_t n = spec.n;
    const int d = spec.d;
    const int n_binary = static_cast<int>(std::floor(spec.binary_fraction * d));
    const int first_binary = d - n_binary;

    // Class sizes from the proportions; the remainder goes to KA.
    const std::int64_t n_pdo = std::llround(spec.proportions[0] * static_cast<double>(n));
    const std::int64_t n_bc = std::llround(spec.proportions[1] * static_cast<double>(n));
    const std::int64_t n_ka = n - n_pdo - n_bc;
    if (n_pdo < 1 || n_bc < 1 || n_ka < 1)
        throw ValueError("proportions leave a class empty at n=" + std::to_string(n));

    std::vector<FeatureSpec> specs;
    specs.reserve(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
        specs.push_back({feature_name(j),
                         j >= first_binary ? FeatureKind::kBinary : FeatureKind::kContinuous, ""});

    Eigen::MatrixXd X(n, d);

    // Each feature evolves from its own derived stream so adding a feature
    // never perturbs the others.
    for (int j = 0; j < d; ++j) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(j)));
        if (j >= first_binary) {
            double x = rng.uniform() < 0.5 ? 1.0 : 0.0;
            X(0, j) = x;
            for (std::int64_t t = 1; t < n; ++t) {
                if (rng.uniform() < kFlipProb) x = 1.0 - x;
                X(t, j) = x;
            }
        } else {
            // Start at the stationary distribution of the AR(1).
            const double stationary_sd =
                1.0 / std::sqrt(1.0 - kArPersistence * kArPersistence);
            double x = rng.normal() * stationary_sd;
            X(0, j) = x;
            for (std::int64_t t = 1; t < n; ++t) {
                x = kArPersistence * x + rng.normal();
                X(t, j) = x;
            }
        }
    }

    // Latent severity score; planted features act at the configured delay.
    Rng noise(derive_seed(spec.seed, static_cast<std::uint64_t>(d)));
    std::vector<double> score(static_cast<std::size_t>(n));
    double prev = 0.0;
    for (std::int64_t t = 0; t < n; ++t) {
        double s = kScorePersistence * prev + spec.noise_sd * noise.normal();
        if (t >= spec.lag) {
            for (std::size_t i = 0; i < spec.planted.size(); ++i)
                s += spec.b[i] * X(t - spec.lag, spec.planted[i]);
        }
        score[static_cast<std::size_t>(t)] = s;
        prev = s;
    }

    // Rank-based assignment: the n_pdo lowest scores become PDO, the next
    // n_bc become BC, the rest KA. Index tie-break keeps this deterministic
    // even with noise_sd = 0.
    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b_) {
        const double sa = score[static_cast<std::size_t>(a)];
        const double sb = score[static_cast<std::size_t>(b_)];
        if (sa != sb) return sa < sb;
        return a < b_;
    });
    std::vector<Severity> y(static_cast<std::size_t>(n), Severity::kPdo);
    for (std::int64_t i = 0; i < n; ++i) {
        const Severity label = i < n_pdo            ? Severity::kPdo
                               : i < n_pdo + n_bc   ? Severity::kBc
                                                    : Severity::kKa;
        y[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = label;
    }

    CrashDataset ds = make_dataset(FeatureSchema(specs), std::move(X), std::move(y), Lineage::kRaw);

    SynthTruth truth;
    truth.planted = spec.planted;
    truth.b = spec.b;
    truth.lag = spec.lag;
    const auto sorted_score = [&](std::int64_t i) {
        return score[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    };
    truth.threshold_lo = 0.5 * (sorted_score(n_pdo - 1) + sorted_score(n_pdo));
    truth.threshold_hi = 0.5 * (sorted_score(n_pdo + n_bc - 1) + sorted_score(n_pdo + n_bc));

    ds.validate();
    return {std::move(ds), std::move(truth)};
}

SynthSpec load_synth_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open spec file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("spec file '" + path + "': " + e.what());
    }
    if (!doc.is_object()) throw ParseError("spec file must hold a JSON object");

    static const std::set<std::string> known = {"n",        "d",           "planted",
                                               "b",        "lag",         "noise_sd",
                                               "proportions", "binary_fraction", "seed"};
    for (const auto& [key, _] : doc.items())
        if (!known.count(key)) throw ParseError("unknown spec key '" + key + "'");

    SynthSpec spec;
    try {
        if (doc.contains("n")) spec.n = doc["n"].get<std::int64_t>();
        if (doc.contains("d")) spec.d = doc["d"].get<int>();
        if (doc.contains("planted")) spec.planted = doc["planted"].get<std::vector<int>>();
        if (doc.contains("b")) {
            if (doc["b"].is_number())
                spec.b.assign(spec.planted.size(), doc["b"].get<double>());
            else
                spec.b = doc["b"].get<std::vector<double>>();
        }
        if (doc.contains("lag")) spec.lag = doc["lag"].get<int>();
        if (doc.contains("noise_sd")) spec.noise_sd = doc["noise_sd"].get<double>();
        if (doc.contains("proportions")) {
            const auto p = doc["proportions"].get<std::vector<double>>();
            if (p.size() != 3) throw ParseError("proportions must list exactly three values");
            std::copy(p.begin(), p.end(), spec.proportions.begin());
        }
        if (doc.contains("binary_fraction"))
            spec.binary_fraction = doc["binary_fraction"].get<double>();
        if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("spec file '" + path + "': " + e.what());
    }
    return spec;
}

void save_truth(const SynthTruth& truth, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write truth file '" + path + "'");
    std::string planted;
    for (std::size_t i = 0; i < truth.planted.size(); ++i) {
        if (i) planted += ',';
        planted += std::to_string(truth.planted[i]);
    }
    std::string b;
    for (std::size_t i = 0; i < truth.b.size(); ++i) {
        if (i) b += ',';
        b += format_real(truth.b[i]);
    }
    out << "planted=" << planted << '\n';
    out << "b=" << b << '\n';
    out << "lag=" << truth.lag << '\n';
    out << "threshold_lo=" << format_real(truth.threshold_lo) << '\n';
    out << "threshold_hi=" << format_real(truth.threshold_hi) << '\n';
}

}  // namespace crashsev
