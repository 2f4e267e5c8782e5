#include "crashsev/causality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "crashsev/error.hpp"
#include "crashsev/parallel.hpp"

namespace crashsev {

namespace {

Eigen::VectorXd series_of(const CrashDataset& ds, int col) {
    if (col == kSeverityColumn) {
        Eigen::VectorXd s(ds.rows());
        for (std::int64_t i = 0; i < ds.rows(); ++i)
            s(i) = static_cast<double>(to_int(ds.y[static_cast<std::size_t>(i)]));
        return s;
    }
    if (col < 0 || col >= ds.cols())
        throw ConfigError("column id " + std::to_string(col) + " out of range");
    return ds.X.col(col);
}

std::string column_name(const CrashDataset& ds, int col) {
    return col == kSeverityColumn ? "severity" : ds.schema.at(col).name;
}

void check_columns(int predictee, const std::optional<int>& cause,
                   const std::vector<int>& conditioners) {
    std::set<int> seen;
    seen.insert(predictee);
    if (cause) {
        if (*cause == predictee) throw ConfigError("cause column equals the predictee");
        if (!seen.insert(*cause).second) throw ConfigError("duplicate column in design");
    }
    for (int z : conditioners) {
        if (z == predictee) throw ConfigError("predictee appears in the conditioning set");
        if (cause && z == *cause)
            throw ConfigError("cause column '" + std::to_string(z) + "' appears in the conditioning set");
        if (!seen.insert(z).second) throw ConfigError("duplicate conditioner column");
    }
}

}  // namespace

LaggedDesign build_lagged_design(const CrashDataset& ds, int predictee, std::optional<int> cause,
                                 const std::vector<int>& conditioners, const LagSpec& lags,
                                 int window_lag) {
    if (lags.p < 1 || lags.q < 1 || lags.r < 0)
        throw ConfigError("lag orders must satisfy p,q >= 1 and r >= 0");
    check_columns(predictee, cause, conditioners);

    const int max_lag = std::max({lags.p, lags.q, lags.r, window_lag});
    const std::int64_t n = ds.rows();
    if (n <= max_lag)
        throw InsufficientDataError("need more than " + std::to_string(max_lag) + " rows, have " +
                                    std::to_string(n));
    const std::int64_t n_eff = n - max_lag;

    std::vector<int> zs = conditioners;
    std::sort(zs.begin(), zs.end());

    const int cols = lags.p + (cause ? lags.q : 0) + lags.r * static_cast<int>(zs.size());
    LaggedDesign design;
    design.start = max_lag;
    design.n_eff = n_eff;
    design.regressors.resize(n_eff, cols);

    const Eigen::VectorXd self = series_of(ds, predictee);
    design.target = self.segment(max_lag, n_eff);

    int col = 0;
    for (int l = 1; l <= lags.p; ++l)
        design.regressors.col(col++) = self.segment(max_lag - l, n_eff);
    if (cause) {
        const Eigen::VectorXd cs = series_of(ds, *cause);
        for (int l = 1; l <= lags.q; ++l)
            design.regressors.col(col++) = cs.segment(max_lag - l, n_eff);
    }
    for (int z : zs) {
        const Eigen::VectorXd zv = series_of(ds, z);
        for (int l = 1; l <= lags.r; ++l)
            design.regressors.col(col++) = zv.segment(max_lag - l, n_eff);
    }
    return design;
}

double aic_of(const OlsFit& fit) {
    const double n = static_cast<double>(fit.n_eff);
    const double mse = std::max(fit.rss / n, 1e-300);
    return n * std::log(mse) + 2.0 * static_cast<double>(fit.k);
}

std::pair<int, std::vector<std::pair<int, double>>> select_lag_aic(
    const CrashDataset& ds, int predictee, const std::vector<int>& conditioners, int max_lag) {
    if (max_lag < 1) throw ConfigError("max_lag must be >= 1");
    std::vector<std::pair<int, double>> trace;
    int best_lag = 1;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int lag = 1; lag <= max_lag; ++lag) {
        const auto design = build_lagged_design(ds, predictee, std::nullopt, conditioners,
                                                uniform_lags(lag), max_lag);
        const OlsFit fit = fit_ols(design.target, design.regressors);
        const double aic = aic_of(fit);
        trace.emplace_back(lag, aic);
        if (aic < best_aic) {
            best_aic = aic;
            best_lag = lag;
        }
    }
    return {best_lag, std::move(trace)};
}

GcScore gc_score(const CrashDataset& ds, int predictee, int cause,
                 const std::vector<int>& conditioners, const LagSpec& lags) {
    const auto restricted =
        build_lagged_design(ds, predictee, std::nullopt, conditioners, lags);
    const auto full = build_lagged_design(ds, predictee, cause, conditioners, lags);

    const OlsFit fit_r = fit_ols(restricted.target, restricted.regressors);
    const OlsFit fit_f = fit_ols(full.target, full.regressors);

    GcScore score;
    score.feature = column_name(ds, cause);
    score.feature_index = cause;
    score.restricted_var = fit_r.resid_var;
    score.full_var = fit_f.resid_var;
    const double ratio = score.restricted_var / std::max(score.full_var, kVarianceFloor);
    score.g = std::max(0.0, std::log(ratio));
    return score;
}

GcRanking rank_predictors(const CrashDataset& ds, int target, const LagSpec& lags, RankMode mode,
                          int n_threads) {
    const int d = ds.cols();
    if (d < 1) throw ConfigError("dataset has no feature columns to rank");

    std::vector<int> candidates;
    for (int j = 0; j < d; ++j)
        if (j != target) candidates.push_back(j);

    std::vector<GcScore> scores(candidates.size());
    parallel_for(
        candidates.size(),
        [&](std::size_t i) {
            const int cause = candidates[i];
            std::vector<int> conditioners;
            if (mode == RankMode::kConditionalOnAll) {
                for (int z : candidates)
                    if (z != cause) conditioners.push_back(z);
            }
            scores[i] = gc_score(ds, target, cause, conditioners, lags);
        },
        n_threads);

    std::sort(scores.begin(), scores.end(), [](const GcScore& a, const GcScore& b) {
        if (a.g != b.g) return a.g > b.g;
        return a.feature_index < b.feature_index;
    });

    GcRanking ranking;
    ranking.scores = std::move(scores);
    ranking.lag = lags;
    return ranking;
}

std::vector<int> select_top_k(const GcRanking& ranking, int k) {
    const int size = static_cast<int>(ranking.scores.size());
    if (k < 1 || k > size)
        throw ValueError("top-k of " + std::to_string(k) + " out of range for a ranking of " +
                         std::to_string(size));
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) out.push_back(ranking.scores[static_cast<std::size_t>(i)].feature_index);
    return out;
}

void save_ranking_csv(const GcRanking& ranking, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write ranking file '" + path + "'");
    out << "rank,feature,G,restricted_var,full_var\n";
    char buf[220];
    int rank = 1;
    for (const auto& s : ranking.scores) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%.12g,%.12g,%.12g\n", rank++, s.feature.c_str(), s.g,
                      s.restricted_var, s.full_var);
        out << buf;
    }
}

}  // namespace crashsev
