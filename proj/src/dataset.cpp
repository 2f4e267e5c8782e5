#include "crashsev/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "crashsev/error.hpp"
#include "crashsev/format.hpp"
#include "crashsev/rng.hpp"

namespace crashsev {

namespace {

constexpr const char* kTimestampColumn = "timestamp";
constexpr const char* kOrderKeyColumn = "order_key";
constexpr const char* kSyntheticColumn = "synthetic";

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, std::size_t row, const std::string& col) {
    const std::string t = trim(cell);
    if (t.empty())
        throw ParseError("missing value at row " + std::to_string(row) + ", column '" + col +
                         "' (imputation is not supported)");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == nullptr || *end != '\0' || end == t.c_str())
        throw ParseError("non-numeric value '" + t + "' at row " + std::to_string(row) +
                         ", column '" + col + "'");
    if (!std::isfinite(v))
        throw ParseError("non-finite value at row " + std::to_string(row) + ", column '" + col + "'");
    return v;
}

void format_double(std::string& out, double v) {
    char buf[40];
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        out += buf;
    } else {
        out += format_real(v);
    }
}

}  // namespace

Severity severity_from_code(const std::string& code) {
    const std::string t = trim(code);
    if (t == "0" || t == "PDO") return Severity::kPdo;
    if (t == "1" || t == "BC") return Severity::kBc;
    if (t == "2" || t == "KA") return Severity::kKa;
    throw ValueError("unknown severity code '" + t + "' (expected 0/1/2 or PDO/BC/KA)");
}

const char* severity_name(Severity s) {
    switch (s) {
        case Severity::kPdo: return "PDO";
        case Severity::kBc: return "BC";
        case Severity::kKa: return "KA";
    }
    return "?";
}

const char* lineage_name(Lineage l) {
    switch (l) {
        case Lineage::kRaw: return "raw";
        case Lineage::kTrain: return "train";
        case Lineage::kTest: return "test";
        case Lineage::kBalanced: return "balanced";
    }
    return "?";
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> entries) : entries_(std::move(entries)) {
    std::set<std::string> seen;
    for (const auto& e : entries_) {
        if (e.name.empty()) throw SchemaError("schema entry with empty name");
        if (!seen.insert(e.name).second)
            throw SchemaError("duplicate schema entry '" + e.name + "'");
    }
}

int FeatureSchema::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].name == name) return static_cast<int>(i);
    return -1;
}

std::vector<std::string> FeatureSchema::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
}

bool FeatureSchema::operator==(const FeatureSchema& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& a = entries_[i];
        const auto& b = other.entries_[i];
        if (a.name != b.name || a.kind != b.kind || a.units != b.units) return false;
    }
    return true;
}

FeatureSchema FeatureSchema::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open schema file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty schema file '" + path + "'");
    auto header = split_line(line);
    if (header.size() < 2 || trim(header[0]) != "name" || trim(header[1]) != "kind")
        throw SchemaError("schema header must be 'name,kind,units'");
    std::vector<FeatureSpec> entries;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        FeatureSpec spec;
        spec.name = trim(cells[0]);
        const std::string kind = cells.size() > 1 ? trim(cells[1]) : "";
        if (kind == "binary") {
            spec.kind = FeatureKind::kBinary;
        } else if (kind == "continuous") {
            spec.kind = FeatureKind::kContinuous;
        } else {
            throw SchemaError("schema row " + std::to_string(row) + ": kind must be binary or continuous");
        }
        spec.units = cells.size() > 2 ? trim(cells[2]) : "";
        entries.push_back(std::move(spec));
    }
    return FeatureSchema(std::move(entries));
}

void FeatureSchema::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write schema file '" + path + "'");
    out << "name,kind,units\n";
    for (const auto& e : entries_) {
        out << e.name << ',' << (e.kind == FeatureKind::kBinary ? "binary" : "continuous") << ','
            << e.units << '\n';
    }
}

void CrashDataset::validate() const {
    const auto n = rows();
    if (X.rows() != n) throw ValueError("X row count does not match label count");
    if (X.cols() != cols()) throw ValueError("X column count does not match schema");
    if (static_cast<std::int64_t>(order_key.size()) != n)
        throw ValueError("order_key length does not match row count");
    if (static_cast<std::int64_t>(synthetic.size()) != n)
        throw ValueError("synthetic flag length does not match row count");
    for (std::int64_t i = 1; i < n; ++i)
        if (order_key[i] <= order_key[i - 1])
            throw ValueError("order_key is not strictly increasing at row " + std::to_string(i));
    for (int j = 0; j < cols(); ++j) {
        if (schema.at(j).kind != FeatureKind::kBinary) continue;
        for (std::int64_t i = 0; i < n; ++i) {
            const double v = X(i, j);
            if (synthetic[static_cast<std::size_t>(i)]) {
                if (v < 0.0 || v > 1.0)
                    throw ValueError("synthetic binary value outside [0,1] at row " +
                                     std::to_string(i) + ", column '" + schema.at(j).name + "'");
            } else if (v != 0.0 && v != 1.0) {
                throw ValueError("binary column '" + schema.at(j).name + "' holds " +
                                 std::to_string(v) + " at row " + std::to_string(i));
            }
        }
    }
}

std::array<std::int64_t, 3> CrashDataset::class_counts() const {
    std::array<std::int64_t, 3> counts{0, 0, 0};
    for (Severity s : y) ++counts[static_cast<std::size_t>(to_int(s))];
    return counts;
}

CrashDataset make_dataset(FeatureSchema schema, Eigen::MatrixXd X, std::vector<Severity> y,
                          Lineage lineage) {
    CrashDataset ds;
    ds.schema = std::move(schema);
    ds.X = std::move(X);
    ds.y = std::move(y);
    ds.order_key.resize(ds.y.size());
    std::iota(ds.order_key.begin(), ds.order_key.end(), 0);
    ds.synthetic.assign(ds.y.size(), 0);
    ds.lineage = lineage;
    ds.validate();
    return ds;
}

CrashDataset load_csv(const std::string& path, const FeatureSchema& schema,
                      const std::string& severity_column) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open data file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw Error("empty data file '" + path + "'");
    const auto header_cells = split_line(line);
    std::vector<std::string> header;
    header.reserve(header_cells.size());
    for (const auto& c : header_cells) header.push_back(trim(c));

    const int d = schema.size();
    std::vector<int> feature_col(static_cast<std::size_t>(d), -1);
    int severity_col = -1, timestamp_col = -1, order_col = -1, synthetic_col = -1;
    std::vector<std::string> unknown;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name == severity_column) {
            severity_col = static_cast<int>(c);
        } else if (name == kTimestampColumn) {
            timestamp_col = static_cast<int>(c);
        } else if (name == kOrderKeyColumn) {
            order_col = static_cast<int>(c);
        } else if (name == kSyntheticColumn) {
            synthetic_col = static_cast<int>(c);
        } else {
            const int idx = schema.index_of(name);
            if (idx < 0) {
                unknown.push_back(name);
            } else {
                feature_col[static_cast<std::size_t>(idx)] = static_cast<int>(c);
            }
        }
    }
    if (severity_col < 0)
        throw SchemaError("severity column '" + severity_column + "' not found in '" + path + "'");
    for (int j = 0; j < d; ++j)
        if (feature_col[static_cast<std::size_t>(j)] < 0)
            throw SchemaError("schema column '" + schema.at(j).name + "' not found in '" + path + "'");
    if (!unknown.empty()) {
        std::string msg = "unknown column(s) in '" + path + "':";
        for (const auto& u : unknown) msg += " '" + u + "'";
        throw SchemaError(msg);
    }

    std::vector<std::vector<double>> rows;
    std::vector<Severity> labels;
    std::vector<double> timestamps;
    std::vector<std::int64_t> order_keys;
    std::vector<std::uint8_t> synth_flags;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw ParseError("row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(header.size()));
        std::vector<double> row(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) {
            const int c = feature_col[static_cast<std::size_t>(j)];
            row[static_cast<std::size_t>(j)] =
                parse_double(cells[static_cast<std::size_t>(c)], lineno, schema.at(j).name);
        }
        labels.push_back(severity_from_code(cells[static_cast<std::size_t>(severity_col)]));
        if (timestamp_col >= 0)
            timestamps.push_back(
                parse_double(cells[static_cast<std::size_t>(timestamp_col)], lineno, kTimestampColumn));
        if (order_col >= 0) {
            const double k =
                parse_double(cells[static_cast<std::size_t>(order_col)], lineno, kOrderKeyColumn);
            order_keys.push_back(static_cast<std::int64_t>(k));
        }
        if (synthetic_col >= 0) {
            const double f =
                parse_double(cells[static_cast<std::size_t>(synthetic_col)], lineno, kSyntheticColumn);
            if (f != 0.0 && f != 1.0)
                throw ValueError("synthetic flag must be 0 or 1 at row " + std::to_string(lineno));
            synth_flags.push_back(static_cast<std::uint8_t>(f));
        }
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<std::int64_t>(rows.size());
    if (n == 0) throw ValueError("data file '" + path + "' has a header but no rows");

    // Resolve chronological order: explicit order_key wins, then timestamp,
    // then file order.
    std::vector<std::int64_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    if (order_col >= 0) {
        std::stable_sort(perm.begin(), perm.end(), [&](std::int64_t a, std::int64_t b) {
            return order_keys[static_cast<std::size_t>(a)] < order_keys[static_cast<std::size_t>(b)];
        });
        for (std::int64_t i = 1; i < n; ++i)
            if (order_keys[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] ==
                order_keys[static_cast<std::size_t>(perm[static_cast<std::size_t>(i - 1)])])
                throw ValueError("duplicate order_key value in '" + path + "'");
    } else if (timestamp_col >= 0) {
        std::stable_sort(perm.begin(), perm.end(), [&](std::int64_t a, std::int64_t b) {
            return timestamps[static_cast<std::size_t>(a)] < timestamps[static_cast<std::size_t>(b)];
        });
    }

    CrashDataset ds;
    ds.schema = schema;
    ds.X.resize(n, d);
    ds.y.resize(static_cast<std::size_t>(n));
    ds.order_key.resize(static_cast<std::size_t>(n));
    ds.synthetic.assign(static_cast<std::size_t>(n), 0);
    for (std::int64_t i = 0; i < n; ++i) {
        const auto src = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
        for (int j = 0; j < d; ++j) ds.X(i, j) = rows[src][static_cast<std::size_t>(j)];
        ds.y[static_cast<std::size_t>(i)] = labels[src];
        ds.order_key[static_cast<std::size_t>(i)] =
            order_col >= 0 ? order_keys[src] : static_cast<std::int64_t>(i);
        if (synthetic_col >= 0) ds.synthetic[static_cast<std::size_t>(i)] = synth_flags[src];
    }
    ds.validate();
    return ds;
}

void save_csv(const CrashDataset& ds, const std::string& path, const std::string& severity_column) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write data file '" + path + "'");
    const auto n = ds.rows();
    const int d = ds.cols();
    bool any_synth = false;
    for (auto f : ds.synthetic) any_synth |= (f != 0);
    bool canonical_order = true;
    for (std::int64_t i = 0; i < n; ++i)
        if (ds.order_key[static_cast<std::size_t>(i)] != i) {
            canonical_order = false;
            break;
        }

    std::string line;
    for (int j = 0; j < d; ++j) {
        line += ds.schema.at(j).name;
        line += ',';
    }
    line += severity_column;
    if (any_synth) line += ",synthetic";
    if (!canonical_order) line += ",order_key";
    out << line << '\n';

    for (std::int64_t i = 0; i < n; ++i) {
        line.clear();
        for (int j = 0; j < d; ++j) {
            format_double(line, ds.X(i, j));
            line += ',';
        }
        line += std::to_string(to_int(ds.y[static_cast<std::size_t>(i)]));
        if (any_synth) {
            line += ',';
            line += ds.synthetic[static_cast<std::size_t>(i)] ? '1' : '0';
        }
        if (!canonical_order) {
            line += ',';
            line += std::to_string(ds.order_key[static_cast<std::size_t>(i)]);
        }
        out << line << '\n';
    }
    if (!out) throw Error("write failed for '" + path + "'");
}

FeatureSchema infer_schema(const std::string& path, const std::string& severity_column) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open data file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw Error("empty data file '" + path + "'");
    const auto header_cells = split_line(line);
    std::vector<std::string> header;
    for (const auto& c : header_cells) header.push_back(trim(c));

    std::vector<int> feature_cols;
    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name == severity_column || name == kTimestampColumn || name == kOrderKeyColumn ||
            name == kSyntheticColumn)
            continue;
        feature_cols.push_back(static_cast<int>(c));
        feature_names.push_back(name);
    }
    std::vector<bool> is_binary(feature_cols.size(), true);
    std::size_t lineno = 1;
    bool any_row = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        any_row = true;
        const auto cells = split_line(line);
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            if (!is_binary[j]) continue;
            const double v = parse_double(cells[static_cast<std::size_t>(feature_cols[j])], lineno,
                                          feature_names[j]);
            if (v != 0.0 && v != 1.0) is_binary[j] = false;
        }
    }
    if (!any_row) throw ValueError("data file '" + path + "' has a header but no rows");
    std::vector<FeatureSpec> entries;
    for (std::size_t j = 0; j < feature_names.size(); ++j)
        entries.push_back(
            {feature_names[j], is_binary[j] ? FeatureKind::kBinary : FeatureKind::kContinuous, ""});
    return FeatureSchema(std::move(entries));
}

namespace {

SummaryStats::Row column_stats(const std::string& name, const Eigen::VectorXd& col) {
    SummaryStats::Row r;
    r.name = name;
    r.min = col.minCoeff();
    r.max = col.maxCoeff();
    r.mean = col.mean();
    const double var = (col.array() - r.mean).square().sum() / static_cast<double>(col.size());
    r.sd = std::sqrt(std::max(0.0, var));
    return r;
}

}  // namespace

SummaryStats summarize(const CrashDataset& ds) {
    if (ds.rows() < 1) throw ValueError("cannot summarize an empty dataset");
    SummaryStats stats;
    const auto n = ds.rows();
    // Severity indicator columns, most severe first.
    const Severity order[3] = {Severity::kKa, Severity::kBc, Severity::kPdo};
    for (Severity cls : order) {
        Eigen::VectorXd ind(n);
        for (std::int64_t i = 0; i < n; ++i)
            ind(i) = ds.y[static_cast<std::size_t>(i)] == cls ? 1.0 : 0.0;
        stats.rows.push_back(column_stats(severity_name(cls), ind));
    }
    for (int j = 0; j < ds.cols(); ++j)
        stats.rows.push_back(column_stats(ds.schema.at(j).name, ds.X.col(j)));
    return stats;
}

void SummaryStats::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write summary file '" + path + "'");
    out << "name,min,max,mean,sd\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%.6g,%.6g\n", r.name.c_str(), r.min, r.max,
                      r.mean, r.sd);
        out << buf;
    }
}

namespace {

CrashDataset take_rows(const CrashDataset& ds, const std::vector<std::int64_t>& idx, Lineage lineage) {
    CrashDataset out;
    out.schema = ds.schema;
    out.X.resize(static_cast<std::int64_t>(idx.size()), ds.cols());
    out.y.resize(idx.size());
    out.order_key.resize(idx.size());
    out.synthetic.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto src = idx[i];
        out.X.row(static_cast<std::int64_t>(i)) = ds.X.row(src);
        out.y[i] = ds.y[static_cast<std::size_t>(src)];
        out.order_key[i] = ds.order_key[static_cast<std::size_t>(src)];
        out.synthetic[i] = ds.synthetic[static_cast<std::size_t>(src)];
    }
    out.lineage = lineage;
    return out;
}

}  // namespace

SplitPair split_train_test(const CrashDataset& ds, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ValueError("split fraction must lie in (0,1), got " + std::to_string(fraction));
    const auto n = ds.rows();
    if (n < 2) throw ValueError("need at least 2 rows to split");
    const auto n_train = static_cast<std::int64_t>(std::llround(fraction * static_cast<double>(n)));

    std::vector<std::int64_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    rng.shuffle(perm);

    std::vector<std::int64_t> train_idx(perm.begin(), perm.begin() + n_train);
    std::vector<std::int64_t> test_idx(perm.begin() + n_train, perm.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    SplitPair pair;
    pair.train = take_rows(ds, train_idx, Lineage::kTrain);
    pair.test = take_rows(ds, test_idx, Lineage::kTest);
    pair.fraction = fraction;
    pair.seed = seed;
    return pair;
}

CrashDataset select_features(const CrashDataset& ds, const std::vector<int>& indices) {
    std::vector<int> cols = indices;
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    if (cols.empty()) throw ValueError("feature selection would leave no columns");
    if (cols.front() < 0 || cols.back() >= ds.cols())
        throw ValueError("feature index out of range in selection");

    std::vector<FeatureSpec> entries;
    entries.reserve(cols.size());
    for (int j : cols) entries.push_back(ds.schema.at(j));
    CrashDataset out;
    out.schema = FeatureSchema(std::move(entries));
    out.X.resize(ds.rows(), static_cast<std::int64_t>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k)
        out.X.col(static_cast<std::int64_t>(k)) = ds.X.col(cols[k]);
    out.y = ds.y;
    out.order_key = ds.order_key;
    out.synthetic = ds.synthetic;
    out.lineage = ds.lineage;
    return out;
}

}  // namespace crashsev
