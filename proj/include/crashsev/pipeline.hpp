#pragma once

#include <string>
#include <vector>

#include "crashsev/balance.hpp"
#include "crashsev/causality.hpp"
#include "crashsev/config.hpp"
#include "crashsev/evaluate.hpp"

namespace crashsev {

/// Everything the end-to-end run produced, mirrored by artifacts in the
/// output directory: manifest.txt, ranking.csv/.svg, balance_report.txt,
/// metrics.csv and one confusion SVG per (algorithm, variant).
struct PipelineResult {
    int lag_used = 0;
    GcRanking ranking;
    std::vector<int> top_features;
    BalanceReport balance;
    std::vector<ComparisonReport> reports;  ///< dt, rf, xgb, dnn order
};

/// Runs ingest -> split -> rank -> balance -> train x4 -> evaluate and
/// writes the artifact bundle. Ranking and balancing see the training split
/// only; the test split is read exclusively by evaluation. A failing stage
/// aborts with the stage name, which is also recorded in the manifest.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace crashsev
