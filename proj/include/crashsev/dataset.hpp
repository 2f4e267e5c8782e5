#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crashsev {

/// Ordinal severity classes. Codes are fixed: property damage only = 0,
/// non-severe or possible injury = 1, fatal or severe injury = 2.
enum class Severity : int { kPdo = 0, kBc = 1, kKa = 2 };

constexpr int kNumClasses = 3;

inline int to_int(Severity s) { return static_cast<int>(s); }
Severity severity_from_code(const std::string& code);
const char* severity_name(Severity s);  // "PDO" / "BC" / "KA"

enum class FeatureKind { kBinary, kContinuous };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::kContinuous;
    std::string units;
};

/// Ordered feature list. Order is stable and defines column indices for
/// every downstream module.
class FeatureSchema {
public:
    FeatureSchema() = default;
    explicit FeatureSchema(std::vector<FeatureSpec> entries);

    int size() const { return static_cast<int>(entries_.size()); }
    const FeatureSpec& at(int i) const { return entries_.at(static_cast<std::size_t>(i)); }
    const std::vector<FeatureSpec>& entries() const { return entries_; }
    /// Index of a named feature, or -1 when absent.
    int index_of(const std::string& name) const;
    std::vector<std::string> names() const;

    bool operator==(const FeatureSchema& other) const;

    static FeatureSchema load_csv(const std::string& path);
    void save_csv(const std::string& path) const;

private:
    std::vector<FeatureSpec> entries_;
};

/// Provenance tag used to keep train/test responsibilities separated.
enum class Lineage { kRaw, kTrain, kTest, kBalanced };
const char* lineage_name(Lineage l);

/// Ordered observation table: n rows of d features plus an ordinal severity
/// label per row. order_key is the chronological position and is strictly
/// increasing; row order in memory always follows it.
struct CrashDataset {
    FeatureSchema schema;
    Eigen::MatrixXd X;  // n x d
    std::vector<Severity> y;
    std::vector<std::int64_t> order_key;
    std::vector<std::uint8_t> synthetic;  // per-row flag, SMOTE rows get 1
    Lineage lineage = Lineage::kRaw;

    std::int64_t rows() const { return static_cast<std::int64_t>(y.size()); }
    int cols() const { return schema.size(); }

    /// Checks all structural invariants; throws ValueError on violation.
    /// Binary columns must hold {0,1} exactly on original rows and stay
    /// inside [0,1] on synthetic rows.
    void validate() const;

    std::array<std::int64_t, 3> class_counts() const;
};

/// Builds a dataset from in-memory parts with canonical order keys.
CrashDataset make_dataset(FeatureSchema schema, Eigen::MatrixXd X,
                          std::vector<Severity> y,
                          Lineage lineage = Lineage::kRaw);

/// Loads one CSV table. The header must contain every schema column plus the
/// severity column; the reserved optional columns "timestamp", "order_key"
/// and "synthetic" are recognized, any other extra column is an error.
/// Row order: order_key column if present, else timestamp (stable sort),
/// else file order.
CrashDataset load_csv(const std::string& path, const FeatureSchema& schema,
                      const std::string& severity_column);

/// Writes features, the severity column and, when needed to make the load
/// lossless, the reserved synthetic/order_key columns.
void save_csv(const CrashDataset& ds, const std::string& path,
              const std::string& severity_column = "severity");

/// Reads only the header and rows of a CSV to build a schema: a column is
/// binary when every value is 0 or 1. Reserved columns are skipped.
FeatureSchema infer_schema(const std::string& path, const std::string& severity_column);

/// Per-column descriptive statistics; the three severity indicator columns
/// (KA, BC, PDO) come first, then features in schema order. sd uses
/// divisor n (population form).
struct SummaryStats {
    struct Row {
        std::string name;
        double min = 0, max = 0, mean = 0, sd = 0;
    };
    std::vector<Row> rows;

    void save_csv(const std::string& path) const;
};

SummaryStats summarize(const CrashDataset& ds);

struct SplitPair {
    CrashDataset train;
    CrashDataset test;
    double fraction = 0.8;
    std::uint64_t seed = 0;
};

/// Uniform random partition without replacement; |train| = round(fraction*n).
/// Both partitions keep their rows ordered by the original order_key.
SplitPair split_train_test(const CrashDataset& ds, double fraction, std::uint64_t seed);

/// Projects the dataset onto a subset of feature columns. Columns keep their
/// relative schema order regardless of the order of `indices`, so selecting
/// every feature is the identity.
CrashDataset select_features(const CrashDataset& ds, const std::vector<int>& indices);

}  // namespace crashsev
