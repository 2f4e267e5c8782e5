#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "crashsev/balance.hpp"
#include "crashsev/causality.hpp"
#include "crashsev/model.hpp"

namespace crashsev {

/// Every knob of the end-to-end run. The defaults reproduce the reference
/// settings: 0.8 split, fixed lag 4, top 17 predictors, 1000 forest
/// estimators, hidden layers 128/128/128/64, 150 epochs, batch 2048.
struct PipelineConfig {
    // [data]
    std::string data_path;
    std::string schema_path;  ///< empty = infer from the data file
    std::string severity_column = "severity";

    // [split]
    double fraction = 0.8;

    // [rank]
    bool lag_auto = false;  ///< false = use `lag` as-is, true = AIC search
    int lag = 4;
    int max_lag = 8;
    int top_k = 17;
    RankMode rank_mode = RankMode::kConditionalOnAll;
    bool rank_on_balanced = false;

    // [balance]
    int balance_k = 5;
    bool round_binary = false;

    // learner sections [tree] [forest] [boost] [mlp]
    TreeConfig tree;
    ForestConfig forest;
    BoostConfig boost;
    MlpConfig mlp;

    // [run]
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int threads = 0;
};

/// Structured-text config: `[section]` headers over key=value lines; `#` or
/// `;` starts a comment. Unknown sections or keys are errors. Keys absent
/// from the file keep their defaults.
PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& config, std::ostream& out);
void save_config(const PipelineConfig& config, const std::string& path);

}  // namespace crashsev
