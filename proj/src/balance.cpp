#include "crashsev/balance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include "crashsev/error.hpp"
#include "crashsev/rng.hpp"
#include "crashsev/standardize.hpp"

namespace crashsev {

namespace {

void reject_test_split(const CrashDataset& ds) {
    if (ds.lineage == Lineage::kTest)
        throw ConfigError("refusing to balance a test split");
}

std::vector<std::int64_t> class_rows(const CrashDataset& ds, Severity cls) {
    std::vector<std::int64_t> rows;
    for (std::int64_t i = 0; i < ds.rows(); ++i)
        if (ds.y[static_cast<std::size_t>(i)] == cls) rows.push_back(i);
    return rows;
}

CrashDataset keep_rows(const CrashDataset& ds, const std::vector<char>& keep) {
    std::int64_t n_out = std::count(keep.begin(), keep.end(), char(1));
    CrashDataset out;
    out.schema = ds.schema;
    out.X.resize(n_out, ds.cols());
    out.y.reserve(static_cast<std::size_t>(n_out));
    out.order_key.reserve(static_cast<std::size_t>(n_out));
    out.synthetic.reserve(static_cast<std::size_t>(n_out));
    out.lineage = Lineage::kBalanced;
    std::int64_t r = 0;
    for (std::int64_t i = 0; i < ds.rows(); ++i) {
        if (!keep[static_cast<std::size_t>(i)]) continue;
        out.X.row(r++) = ds.X.row(i);
        out.y.push_back(ds.y[static_cast<std::size_t>(i)]);
        out.order_key.push_back(ds.order_key[static_cast<std::size_t>(i)]);
        out.synthetic.push_back(ds.synthetic[static_cast<std::size_t>(i)]);
    }
    return out;
}

/// k nearest class neighbors per class row, by Euclidean distance in the
/// standardized space; ties broken toward the lower row index.
std::vector<std::vector<std::int64_t>> neighbor_table(const Eigen::MatrixXd& Z,
                                                      const std::vector<std::int64_t>& rows,
                                                      int k_eff) {
    const std::size_t m = rows.size();
    std::vector<std::vector<std::int64_t>> table(m);
    std::vector<std::pair<double, std::int64_t>> dist;
    dist.reserve(m - 1);
    for (std::size_t a = 0; a < m; ++a) {
        dist.clear();
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            const double d2 = (Z.row(rows[a]) - Z.row(rows[b])).squaredNorm();
            dist.emplace_back(d2, rows[b]);
        }
        std::partial_sort(dist.begin(), dist.begin() + k_eff, dist.end());
        table[a].reserve(static_cast<std::size_t>(k_eff));
        for (int i = 0; i < k_eff; ++i) table[a].push_back(dist[static_cast<std::size_t>(i)].second);
    }
    return table;
}

SmoteResult smote_core(const CrashDataset& ds, Severity cls, std::int64_t target, int k,
                       std::uint64_t seed, const Standardizer& standardizer, bool round_binary) {
    if (k < 1) throw ConfigError("neighbor count must be >= 1");
    const auto rows = class_rows(ds, cls);
    const std::int64_t m = static_cast<std::int64_t>(rows.size());
    if (m == 0)
        throw ValueError(std::string("class ") + severity_name(cls) + " has no rows to oversample");
    if (target < m)
        throw ValueError(std::string("target below the current ") + severity_name(cls) +
                         " count; undersample instead");

    const std::int64_t n_new = target - m;
    const std::int64_t n_in = ds.rows();

    SmoteResult result;
    result.data = ds;
    result.data.lineage = Lineage::kBalanced;
    if (n_new == 0) return result;

    CrashDataset& out = result.data;
    out.X.conservativeResize(n_in + n_new, Eigen::NoChange);
    std::int64_t next_key = out.order_key.back() + 1;

    Rng rng(seed);
    std::vector<std::vector<std::int64_t>> neighbors;
    int k_eff = 0;
    if (m == 1) {
        std::cerr << "warning: class " << severity_name(cls)
                  << " has a single row; oversampling by duplication\n";
    } else {
        k_eff = static_cast<int>(std::min<std::int64_t>(k, m - 1));
        const Eigen::MatrixXd Z = standardizer.transform(ds.X);
        neighbors = neighbor_table(Z, rows, k_eff);
    }

    for (std::int64_t t = 0; t < n_new; ++t) {
        const std::size_t pick = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(m)));
        const std::int64_t seed_row = rows[pick];
        std::int64_t neighbor_row = seed_row;
        double u = 0.0;
        Eigen::VectorXd x = ds.X.row(seed_row);
        if (m > 1) {
            neighbor_row =
                neighbors[pick][rng.below(static_cast<std::uint64_t>(k_eff))];
            u = rng.uniform();
            x += u * (ds.X.row(neighbor_row).transpose() - x);
        }
        if (round_binary) {
            for (int j = 0; j < ds.cols(); ++j)
                if (ds.schema.at(j).kind == FeatureKind::kBinary) x(j) = std::round(x(j));
        }
        out.X.row(n_in + t) = x;
        out.y.push_back(cls);
        out.order_key.push_back(next_key++);
        out.synthetic.push_back(1);
        result.origins.push_back({seed_row, neighbor_row, n_in + t, u});
    }
    return result;
}

}  // namespace

CrashDataset undersample(const CrashDataset& ds, Severity cls, std::int64_t target,
                         std::uint64_t seed) {
    reject_test_split(ds);
    const auto rows = class_rows(ds, cls);
    const std::int64_t m = static_cast<std::int64_t>(rows.size());
    if (target < 0) throw ValueError("undersample target must be non-negative");
    if (target > m)
        throw ValueError(std::string("target exceeds the current ") + severity_name(cls) +
                         " count; oversample instead");

    std::vector<std::int64_t> picks = rows;
    Rng rng(seed);
    rng.shuffle(picks);
    picks.resize(static_cast<std::size_t>(target));

    std::vector<char> keep(static_cast<std::size_t>(ds.rows()), 1);
    for (std::int64_t i : rows) keep[static_cast<std::size_t>(i)] = 0;
    for (std::int64_t i : picks) keep[static_cast<std::size_t>(i)] = 1;
    CrashDataset out = keep_rows(ds, keep);
    out.validate();
    return out;
}

SmoteResult smote_oversample(const CrashDataset& ds, Severity cls, std::int64_t target, int k,
                             std::uint64_t seed, bool round_binary) {
    reject_test_split(ds);
    Standardizer standardizer;
    standardizer.fit(ds.X);
    SmoteResult result = smote_core(ds, cls, target, k, seed, standardizer, round_binary);
    result.data.validate();
    return result;
}

BalanceResult balance_classes(const CrashDataset& train, int k, std::uint64_t seed,
                              bool round_binary) {
    reject_test_split(train);
    const auto before = train.class_counts();
    for (int c = 0; c < kNumClasses; ++c)
        if (before[static_cast<std::size_t>(c)] == 0)
            throw ValueError(std::string("class ") + severity_name(static_cast<Severity>(c)) +
                             " is empty; cannot balance");

    auto sorted = before;
    std::sort(sorted.begin(), sorted.end());
    const std::int64_t target = sorted[1];

    // Fit the distance standardization once, on the incoming split, so later
    // undersampling does not shift the metric.
    Standardizer standardizer;
    standardizer.fit(train.X);

    BalanceResult result;
    CrashDataset ds = train;
    for (int c = 0; c < kNumClasses; ++c) {
        if (before[static_cast<std::size_t>(c)] <= target) continue;
        const Severity cls = static_cast<Severity>(c);
        ds = undersample(ds, cls, target,
                         derive_seed(seed, std::string("undersample:") + severity_name(cls)));
    }
    for (int c = 0; c < kNumClasses; ++c) {
        if (before[static_cast<std::size_t>(c)] >= target) continue;
        const Severity cls = static_cast<Severity>(c);
        SmoteResult part =
            smote_core(ds, cls, target, k,
                       derive_seed(seed, std::string("smote:") + severity_name(cls)),
                       standardizer, round_binary);
        ds = std::move(part.data);
        result.origins.insert(result.origins.end(), part.origins.begin(), part.origins.end());
    }

    ds.validate();
    result.report.before = before;
    result.report.after = ds.class_counts();
    result.report.target_count = target;
    result.report.k_neighbors = k;
    result.report.seed = seed;
    result.data = std::move(ds);
    return result;
}

void BalanceReport::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write balance report '" + path + "'");
    out << "target_count=" << target_count << '\n';
    out << "k_neighbors=" << k_neighbors << '\n';
    out << "seed=" << seed << '\n';
    for (int c = 0; c < kNumClasses; ++c)
        out << "before_" << severity_name(static_cast<Severity>(c)) << '='
            << before[static_cast<std::size_t>(c)] << '\n';
    for (int c = 0; c < kNumClasses; ++c)
        out << "after_" << severity_name(static_cast<Severity>(c)) << '='
            << after[static_cast<std::size_t>(c)] << '\n';
}

}  // namespace crashsev
