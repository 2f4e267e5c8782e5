#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "crashsev/dataset.hpp"

namespace crashsev {

/// Recipe for a synthetic crash-like dataset with planted lagged causes.
struct SynthSpec {
    std::int64_t n = 20000;
    int d = 20;
    std::vector<int> planted;   ///< feature indices that drive the latent severity score
    std::vector<double> b;      ///< coefficient per planted feature
    int lag = 4;                ///< the planted effect acts at this delay
    double noise_sd = 0.5;      ///< sd of the latent-score innovation
    std::array<double, 3> proportions = {0.69, 0.28, 0.03};  ///< PDO, BC, KA shares
    double binary_fraction = 0.0;  ///< trailing floor(fraction*d) features are 0/1 Markov chains
    std::uint64_t seed = 1;
};

/// Ground truth emitted alongside a generated dataset.
struct SynthTruth {
    std::vector<int> planted;
    std::vector<double> b;
    int lag = 0;
    double threshold_lo = 0.0;  ///< latent score at the PDO/BC boundary
    double threshold_hi = 0.0;  ///< latent score at the BC/KA boundary
};

struct SynthResult {
    CrashDataset data;
    SynthTruth truth;
};

/// Validates the spec; throws ValueError/ConfigError on violation.
void validate_spec(const SynthSpec& spec);

/// Generates the dataset. Continuous features follow an AR(1) with persistence
/// 0.5; binary features flip with probability 0.2 per step. A latent score
/// s_t = sum_j b_j * x_{j,t-lag} + 0.3 * s_{t-1} + noise drives the labels:
/// rank thresholds place exactly round(p*n) rows in each class (lowest scores
/// become PDO). Same spec => byte-identical output.
SynthResult generate(const SynthSpec& spec);

/// Reads a spec from a JSON file. Unknown keys are rejected; "b" may be a
/// scalar, which is broadcast over the planted set.
SynthSpec load_synth_spec(const std::string& path);

/// Writes the truth metadata as key=value lines.
void save_truth(const SynthTruth& truth, const std::string& path);

}  // namespace crashsev
