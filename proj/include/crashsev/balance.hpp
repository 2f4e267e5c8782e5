#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "crashsev/dataset.hpp"

namespace crashsev {

/// Where one synthetic row came from: its seed row, the neighbor it was
/// interpolated toward, and the interpolation weight. Row indices refer to
/// the dataset the synthetic row was appended to.
struct SmoteOrigin {
    std::int64_t seed_row = 0;
    std::int64_t neighbor_row = 0;
    std::int64_t out_row = 0;
    double u = 0.0;
};

struct SmoteResult {
    CrashDataset data;
    std::vector<SmoteOrigin> origins;
};

/// Counts before/after one balancing run.
struct BalanceReport {
    std::array<std::int64_t, kNumClasses> before{};
    std::array<std::int64_t, kNumClasses> after{};
    std::int64_t target_count = 0;
    int k_neighbors = 0;
    std::uint64_t seed = 0;

    void save(const std::string& path) const;
};

struct BalanceResult {
    CrashDataset data;
    BalanceReport report;
    std::vector<SmoteOrigin> origins;
};

/// Keeps a uniform random subset of `target` rows of class `cls`; every other
/// row survives. Surviving rows keep their relative order. target above the
/// current count is an error directing the caller to oversample instead.
CrashDataset undersample(const CrashDataset& ds, Severity cls, std::int64_t target,
                         std::uint64_t seed);

/// Appends target - count(cls) synthetic rows of class `cls`, each an
/// interpolation x_i + u * (x_nn - x_i) between a random class row and one of
/// its k nearest class neighbors. Neighbors use Euclidean distance on
/// z-score standardized features (fit on the input dataset); interpolation
/// happens in the original feature space. A single-row class falls back to
/// duplication with a warning on stderr. round_binary snaps binary-kind
/// columns of synthetic rows to {0,1}.
SmoteResult smote_oversample(const CrashDataset& ds, Severity cls, std::int64_t target, int k,
                             std::uint64_t seed, bool round_binary = false);

/// Equalizes all three classes at the median class count: classes above it
/// are under-sampled, classes below it SMOTE-oversampled. Standardization for
/// neighbor search is fitted once on the input split. Output rows are the
/// surviving originals (original order) followed by synthetic rows grouped by
/// class in generation order.
BalanceResult balance_classes(const CrashDataset& train, int k, std::uint64_t seed,
                              bool round_binary = false);

}  // namespace crashsev
