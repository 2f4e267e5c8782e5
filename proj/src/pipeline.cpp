#include "crashsev/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "crashsev/error.hpp"
#include "crashsev/format.hpp"
#include "crashsev/rng.hpp"
#include "crashsev/svg.hpp"

namespace crashsev {

namespace {

std::string fmt_real(double v) { return format_real(v); }

using Manifest = std::vector<std::pair<std::string, std::string>>;

void write_manifest(const Manifest& kv, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write manifest '" + path + "'");
    for (const auto& [key, value] : kv) out << key << '=' << value << '\n';
}

void flatten_config(const PipelineConfig& c, Manifest& kv) {
    kv.emplace_back("data.path", c.data_path);
    kv.emplace_back("data.schema", c.schema_path);
    kv.emplace_back("data.severity_column", c.severity_column);
    kv.emplace_back("split.fraction", fmt_real(c.fraction));
    kv.emplace_back("rank.lag", c.lag_auto ? std::string("auto") : std::to_string(c.lag));
    kv.emplace_back("rank.max_lag", std::to_string(c.max_lag));
    kv.emplace_back("rank.top_k", std::to_string(c.top_k));
    kv.emplace_back("rank.mode",
                    c.rank_mode == RankMode::kPairwise ? "pairwise" : "conditional");
    kv.emplace_back("rank.on", c.rank_on_balanced ? "balanced" : "train");
    kv.emplace_back("balance.k", std::to_string(c.balance_k));
    kv.emplace_back("balance.round_binary", c.round_binary ? "true" : "false");
    kv.emplace_back("tree.max_depth", std::to_string(c.tree.max_depth));
    kv.emplace_back("tree.min_samples_split", std::to_string(c.tree.min_samples_split));
    kv.emplace_back("forest.n_estimators", std::to_string(c.forest.n_estimators));
    kv.emplace_back("forest.max_depth", std::to_string(c.forest.max_depth));
    kv.emplace_back("forest.min_samples_split", std::to_string(c.forest.min_samples_split));
    kv.emplace_back("forest.features_per_split", std::to_string(c.forest.features_per_split));
    kv.emplace_back("forest.bootstrap", c.forest.bootstrap ? "true" : "false");
    kv.emplace_back("boost.rounds", std::to_string(c.boost.rounds));
    kv.emplace_back("boost.eta", fmt_real(c.boost.eta));
    kv.emplace_back("boost.lambda", fmt_real(c.boost.lambda));
    kv.emplace_back("boost.gamma", fmt_real(c.boost.gamma));
    kv.emplace_back("boost.max_depth", std::to_string(c.boost.max_depth));
    kv.emplace_back("boost.min_child_hessian", fmt_real(c.boost.min_child_hessian));
    std::string hidden;
    for (std::size_t i = 0; i < c.mlp.hidden.size(); ++i) {
        if (i) hidden += ',';
        hidden += std::to_string(c.mlp.hidden[i]);
    }
    kv.emplace_back("mlp.hidden", hidden);
    kv.emplace_back("mlp.epochs", std::to_string(c.mlp.epochs));
    kv.emplace_back("mlp.batch_size", std::to_string(c.mlp.batch_size));
    kv.emplace_back("mlp.learning_rate", fmt_real(c.mlp.learning_rate));
    kv.emplace_back("run.seed", std::to_string(c.seed));
    kv.emplace_back("run.out_dir", c.out_dir);
    kv.emplace_back("run.threads", std::to_string(c.threads));
}

void append_metrics_row(std::ofstream& out, const char* algo, const char* variant,
                        const EvaluationResult& r) {
    char buf[48];
    out << algo << ',' << variant;
    const auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        out << ',' << buf;
    };
    put(r.metrics.accuracy);
    for (int c = 0; c < kNumClasses; ++c) put(r.metrics.recall[static_cast<std::size_t>(c)]);
    for (int c = 0; c < kNumClasses; ++c) put(r.metrics.precision[static_cast<std::size_t>(c)]);
    for (int c = 0; c < kNumClasses; ++c) put(r.metrics.f1[static_cast<std::size_t>(c)]);
    put(r.metrics.macro_f1);
    for (int i = 0; i < kNumClasses; ++i)
        for (int j = 0; j < kNumClasses; ++j)
            out << ','
                << r.cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    out << '\n';
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
    namespace fs = std::filesystem;
    if (config.data_path.empty()) throw ConfigError("data.path is required");
    if (config.out_dir.empty()) throw ConfigError("run.out_dir is required");
    if (config.fraction <= 0.0 || config.fraction >= 1.0)
        throw ConfigError("split.fraction must lie strictly between 0 and 1");
    if (config.top_k < 1) throw ConfigError("rank.top_k must be >= 1");

    fs::create_directories(config.out_dir);
    const auto artifact = [&](const char* name) {
        return (fs::path(config.out_dir) / name).string();
    };

    Manifest kv;
    kv.emplace_back("status", "ok");  // patched on failure
    flatten_config(config, kv);

    std::string current_stage;
    const auto fail_manifest = [&](const std::string& what) {
        kv[0].second = "failed";
        kv.emplace_back("failed_stage", current_stage);
        kv.emplace_back("error", what);
        write_manifest(kv, artifact("manifest.txt"));
    };

    PipelineResult result;
    try {
        // -- ingest ------------------------------------------------------
        current_stage = "ingest";
        const FeatureSchema schema = config.schema_path.empty()
                                         ? infer_schema(config.data_path, config.severity_column)
                                         : FeatureSchema::load_csv(config.schema_path);
        CrashDataset raw = load_csv(config.data_path, schema, config.severity_column);
        kv.emplace_back("rows", std::to_string(raw.rows()));
        kv.emplace_back("features", std::to_string(raw.cols()));

        // -- split -------------------------------------------------------
        current_stage = "split";
        const std::uint64_t split_seed = derive_seed(config.seed, "split");
        SplitPair split = split_train_test(raw, config.fraction, split_seed);
        kv.emplace_back("split.seed", std::to_string(split_seed));
        kv.emplace_back("split.train_rows", std::to_string(split.train.rows()));
        kv.emplace_back("split.test_rows", std::to_string(split.test.rows()));

        // -- balance (before ranking only when the flag asks for it) -----
        const std::uint64_t balance_seed = derive_seed(config.seed, "balance");
        CrashDataset balanced;
        const auto do_balance = [&] {
            current_stage = "balance";
            BalanceResult b =
                balance_classes(split.train, config.balance_k, balance_seed, config.round_binary);
            balanced = std::move(b.data);
            result.balance = b.report;
            b.report.save(artifact("balance_report.txt"));
        };
        if (config.rank_on_balanced) do_balance();

        // -- rank --------------------------------------------------------
        current_stage = "rank";
        const CrashDataset& rank_ds = config.rank_on_balanced ? balanced : split.train;
        if (config.lag_auto) {
            std::vector<int> all_features(static_cast<std::size_t>(rank_ds.cols()));
            for (int j = 0; j < rank_ds.cols(); ++j)
                all_features[static_cast<std::size_t>(j)] = j;
            result.lag_used =
                select_lag_aic(rank_ds, kSeverityColumn, all_features, config.max_lag).first;
        } else {
            result.lag_used = config.lag;
        }
        result.ranking =
            rank_predictors(rank_ds, kSeverityColumn, uniform_lags(result.lag_used),
                            config.rank_mode, config.threads);
        save_ranking_csv(result.ranking, artifact("ranking.csv"));
        save_ranking_svg(result.ranking, artifact("ranking.svg"));
        kv.emplace_back("rank.lag_used", std::to_string(result.lag_used));

        // -- select ------------------------------------------------------
        current_stage = "select";
        result.top_features = select_top_k(result.ranking, config.top_k);
        std::string top_names;
        for (std::size_t i = 0; i < result.top_features.size(); ++i) {
            if (i) top_names += ',';
            top_names += rank_ds.schema.at(result.top_features[i]).name;
        }
        kv.emplace_back("rank.selected", top_names);

        if (!config.rank_on_balanced) do_balance();
        kv.emplace_back("balance.seed", std::to_string(balance_seed));
        kv.emplace_back("balance.target_count", std::to_string(result.balance.target_count));

        // -- train + evaluate, one comparison per algorithm --------------
        const LearnerKind kinds[] = {LearnerKind::kDecisionTree, LearnerKind::kRandomForest,
                                     LearnerKind::kGradientBoost, LearnerKind::kMlp};
        for (LearnerKind kind : kinds) {
            const std::string name = learner_name(kind);
            current_stage = "train:" + name;
            TrainConfig tc;
            tc.kind = kind;
            tc.seed = derive_seed(config.seed, "train:" + name);
            tc.tree = config.tree;
            tc.forest = config.forest;
            tc.boost = config.boost;
            tc.mlp = config.mlp;
            tc.forest.n_threads = config.threads;
            tc.boost.n_threads = config.threads;

            ComparisonReport report =
                compare_reduced_full(balanced, split.test, result.ranking, config.top_k, tc);
            save_confusion_svg(report.full.normalized,
                               "Confusion matrix - " + name + ", all predictors",
                               artifact(("confusion_" + name + "_full.svg").c_str()));
            save_confusion_svg(report.reduced.normalized,
                               "Confusion matrix - " + name + ", top " +
                                   std::to_string(config.top_k) + " predictors",
                               artifact(("confusion_" + name + "_reduced.svg").c_str()));
            kv.emplace_back("train." + name + ".seed", std::to_string(tc.seed));
            result.reports.push_back(std::move(report));
        }

        // -- emit --------------------------------------------------------
        current_stage = "emit";
        std::ofstream metrics_csv(artifact("metrics.csv"));
        if (!metrics_csv) throw Error("cannot write metrics.csv");
        metrics_csv << "algo,variant,accuracy,recall_PDO,recall_BC,recall_KA,precision_PDO,"
                       "precision_BC,precision_KA,f1_PDO,f1_BC,f1_KA,macro_f1,"
                       "count_PDO_PDO,count_PDO_BC,count_PDO_KA,count_BC_PDO,count_BC_BC,"
                       "count_BC_KA,count_KA_PDO,count_KA_BC,count_KA_KA\n";
        for (const auto& report : result.reports) {
            append_metrics_row(metrics_csv, learner_name(report.kind), "full", report.full);
            append_metrics_row(metrics_csv, learner_name(report.kind), "reduced",
                               report.reduced);
        }
        metrics_csv.close();
        write_manifest(kv, artifact("manifest.txt"));
    } catch (const std::exception& e) {
        fail_manifest(e.what());
        throw Error("stage " + current_stage + ": " + e.what());
    }
    return result;
}

}  // namespace crashsev
