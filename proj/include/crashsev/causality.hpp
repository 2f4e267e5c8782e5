#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crashsev/dataset.hpp"
#include "crashsev/ols.hpp"

namespace crashsev {

/// Column id addressing either a feature column (>= 0, schema index) or the
/// ordinal severity label series.
constexpr int kSeverityColumn = -1;

/// Lag orders: p self-lags of the predictee, q lags of the candidate cause,
/// r lags of every conditioning variable.
struct LagSpec {
    int p = 4;
    int q = 4;
    int r = 4;
};

inline LagSpec uniform_lags(int lag) { return LagSpec{lag, lag, lag}; }

struct LaggedDesign {
    Eigen::VectorXd target;
    Eigen::MatrixXd regressors;  // without the intercept column
    std::int64_t n_eff = 0;
    int start = 0;  // first usable row index
};

/// Builds the lagged regression design for `predictee` on its own p lags,
/// q lags of `cause` when given, and r lags of each conditioner (ascending
/// column order). The usable window always starts at max(p,q,r) so the
/// restricted and full models of one score share identical target rows;
/// `window_lag` widens the window further (lag search over a common sample).
LaggedDesign build_lagged_design(const CrashDataset& ds, int predictee,
                                 std::optional<int> cause, const std::vector<int>& conditioners,
                                 const LagSpec& lags, int window_lag = 0);

/// AIC for a least-squares fit: n_eff * ln(rss/n_eff) + 2k.
double aic_of(const OlsFit& fit);

/// Fits the all-variables model at each uniform lag 1..max_lag on the common
/// sample defined by max_lag and returns (argmin AIC, trace). Ties go to the
/// smaller lag.
std::pair<int, std::vector<std::pair<int, double>>> select_lag_aic(
    const CrashDataset& ds, int predictee, const std::vector<int>& conditioners, int max_lag);

struct GcScore {
    std::string feature;
    int feature_index = -1;
    double g = 0.0;  // ln(restricted_var / full_var), floored and clamped
    double restricted_var = 0.0;
    double full_var = 0.0;
};

/// Variance floor applied to the full-model residual variance before the
/// ratio, and the clamp that keeps scores non-negative under round-off.
constexpr double kVarianceFloor = 1e-12;

/// Conditional Granger score of `cause` on `predictee` given the
/// conditioning set: both models are fitted on the identical row window and
/// G = ln(var(restricted residuals) / var(full residuals)).
GcScore gc_score(const CrashDataset& ds, int predictee, int cause,
                 const std::vector<int>& conditioners, const LagSpec& lags);

enum class RankMode {
    kConditionalOnAll,  // condition each candidate on all remaining features
    kPairwise,          // no conditioning set
};

struct GcRanking {
    std::vector<GcScore> scores;  // descending by g, ties by column index
    LagSpec lag;
    std::vector<std::pair<int, double>> aic_trace;  // filled when lag was selected by AIC
};

/// Scores every feature column as a candidate cause of `target` and returns
/// the descending ranking. Per-feature scores are independent and run on
/// worker threads; the result is identical to the serial order.
GcRanking rank_predictors(const CrashDataset& ds, int target, const LagSpec& lags,
                          RankMode mode = RankMode::kConditionalOnAll, int n_threads = 0);

/// First k feature column indices in rank order.
std::vector<int> select_top_k(const GcRanking& ranking, int k);

void save_ranking_csv(const GcRanking& ranking, const std::string& path);

}  // namespace crashsev
