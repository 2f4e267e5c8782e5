#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crashsev/balance.hpp"
#include "crashsev/causality.hpp"
#include "crashsev/config.hpp"
#include "crashsev/dataset.hpp"
#include "crashsev/error.hpp"
#include "crashsev/evaluate.hpp"
#include "crashsev/model.hpp"
#include "crashsev/pipeline.hpp"
#include "crashsev/svg.hpp"
#include "crashsev/synthgen.hpp"

namespace {

using namespace crashsev;

FeatureSchema resolve_schema(const std::string& schema_arg, const std::string& data_path,
                             const std::string& severity_column) {
    if (schema_arg.empty() || schema_arg == "auto")
        return infer_schema(data_path, severity_column);
    return FeatureSchema::load_csv(schema_arg);
}

int run(int argc, char** argv) {
    CLI::App app{"Crash-severity toolkit: causal predictor ranking and classification"};
    app.require_subcommand(1);

    // ---- synth ---------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with planted causes");
    std::string synth_spec, synth_out, synth_truth;
    synth->add_option("--spec", synth_spec, "JSON spec file")->required();
    synth->add_option("--out", synth_out, "output CSV")->required();
    synth->add_option("--truth", synth_truth, "ground-truth metadata output")->required();
    synth->callback([&] {
        const SynthResult result = generate(load_synth_spec(synth_spec));
        save_csv(result.data, synth_out);
        save_truth(result.truth, synth_truth);
    });

    // ---- ingest --------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "Load a CSV and write per-column statistics");
    std::string ing_data, ing_schema = "auto", ing_summary, ing_sev = "severity";
    ingest->add_option("--data", ing_data, "input CSV")->required();
    ingest->add_option("--schema", ing_schema, "schema CSV, or 'auto' to infer");
    ingest->add_option("--summary", ing_summary, "summary statistics output CSV")->required();
    ingest->add_option("--severity-column", ing_sev, "label column name");
    ingest->callback([&] {
        const FeatureSchema schema = resolve_schema(ing_schema, ing_data, ing_sev);
        const CrashDataset ds = load_csv(ing_data, schema, ing_sev);
        summarize(ds).save_csv(ing_summary);
    });

    // ---- rank ----------------------------------------------------------
    auto* rank = app.add_subcommand("rank", "Rank predictors by conditional Granger causality");
    std::string rank_data, rank_schema = "auto", rank_sev = "severity", rank_lag = "4";
    std::string rank_out, rank_chart, rank_mode = "conditional";
    int rank_max_lag = 8, rank_top = 0;
    rank->add_option("--data", rank_data, "input CSV")->required();
    rank->add_option("--schema", rank_schema, "schema CSV, or 'auto' to infer");
    rank->add_option("--severity-column", rank_sev, "label column name");
    rank->add_option("--lag", rank_lag, "lag order, or 'auto' for AIC selection");
    rank->add_option("--max-lag", rank_max_lag, "largest lag tried when --lag auto");
    rank->add_option("--top", rank_top, "echo the top-k feature names to stdout");
    rank->add_option("--mode", rank_mode, "conditional or pairwise scoring");
    rank->add_option("--out", rank_out, "ranking CSV output")->required();
    rank->add_option("--chart", rank_chart, "bar-chart SVG output");
    rank->callback([&] {
        const FeatureSchema schema = resolve_schema(rank_schema, rank_data, rank_sev);
        const CrashDataset ds = load_csv(rank_data, schema, rank_sev);
        int lag;
        if (rank_lag == "auto") {
            std::vector<int> all(static_cast<std::size_t>(ds.cols()));
            for (int j = 0; j < ds.cols(); ++j) all[static_cast<std::size_t>(j)] = j;
            lag = select_lag_aic(ds, kSeverityColumn, all, rank_max_lag).first;
            std::cout << "selected lag " << lag << " by AIC\n";
        } else {
            lag = std::stoi(rank_lag);
        }
        const RankMode mode =
            rank_mode == "pairwise" ? RankMode::kPairwise : RankMode::kConditionalOnAll;
        const GcRanking ranking = rank_predictors(ds, kSeverityColumn, uniform_lags(lag), mode);
        save_ranking_csv(ranking, rank_out);
        if (!rank_chart.empty()) save_ranking_svg(ranking, rank_chart);
        if (rank_top > 0) {
            for (int j : select_top_k(ranking, rank_top))
                std::cout << ds.schema.at(j).name << '\n';
        }
    });

    // ---- balance -------------------------------------------------------
    auto* balance = app.add_subcommand("balance", "Equalize class counts on a training table");
    std::string bal_data, bal_schema = "auto", bal_sev = "severity", bal_out, bal_report;
    int bal_k = 5;
    std::uint64_t bal_seed = 1;
    bool bal_round = false;
    balance->add_option("--data", bal_data, "input CSV")->required();
    balance->add_option("--schema", bal_schema, "schema CSV, or 'auto' to infer");
    balance->add_option("--severity-column", bal_sev, "label column name");
    balance->add_option("--k", bal_k, "SMOTE neighbor count");
    balance->add_option("--seed", bal_seed, "random seed");
    balance->add_flag("--round-binary", bal_round, "snap synthetic binary columns to 0/1");
    balance->add_option("--out", bal_out, "balanced CSV output")->required();
    balance->add_option("--report", bal_report, "before/after report output");
    balance->callback([&] {
        const FeatureSchema schema = resolve_schema(bal_schema, bal_data, bal_sev);
        const CrashDataset ds = load_csv(bal_data, schema, bal_sev);
        const BalanceResult result = balance_classes(ds, bal_k, bal_seed, bal_round);
        save_csv(result.data, bal_out, bal_sev);
        if (!bal_report.empty()) result.report.save(bal_report);
    });

    // ---- train ---------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train one classifier and save the model");
    std::string tr_algo, tr_data, tr_schema = "auto", tr_sev = "severity";
    std::string tr_features = "all", tr_config, tr_model_out;
    train->add_option("--algo", tr_algo, "dt, rf, xgb or dnn")->required();
    train->add_option("--data", tr_data, "training CSV")->required();
    train->add_option("--schema", tr_schema, "schema CSV, or 'auto' to infer");
    train->add_option("--severity-column", tr_sev, "label column name");
    train->add_option("--features", tr_features,
                      "'all', or 'top:<k>' to rank first and keep the k best");
    train->add_option("--config", tr_config, "pipeline config file for hyperparameters");
    train->add_option("--model-out", tr_model_out, "model file output")->required();
    train->callback([&] {
        const PipelineConfig pc = tr_config.empty() ? PipelineConfig{} : load_config(tr_config);
        const FeatureSchema schema = resolve_schema(tr_schema, tr_data, tr_sev);
        CrashDataset ds = load_csv(tr_data, schema, tr_sev);

        if (tr_features.rfind("top:", 0) == 0) {
            const int k = std::stoi(tr_features.substr(4));
            const GcRanking ranking =
                rank_predictors(ds, kSeverityColumn, uniform_lags(pc.lag), pc.rank_mode);
            ds = select_features(ds, select_top_k(ranking, k));
        } else if (tr_features != "all") {
            throw ConfigError("--features must be 'all' or 'top:<k>'");
        }

        TrainConfig tc;
        tc.kind = learner_from_name(tr_algo);
        tc.seed = derive_seed(pc.seed, "train:" + tr_algo);
        tc.tree = pc.tree;
        tc.forest = pc.forest;
        tc.boost = pc.boost;
        tc.mlp = pc.mlp;
        save_model(train_model(ds, tc), tr_model_out);
    });

    // ---- evaluate ------------------------------------------------------
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a saved model on a test table");
    std::string ev_model, ev_test, ev_schema = "auto", ev_sev = "severity", ev_out, ev_matrix;
    evaluate->add_option("--model", ev_model, "model file")->required();
    evaluate->add_option("--test", ev_test, "test CSV")->required();
    evaluate->add_option("--schema", ev_schema, "schema CSV, or 'auto' to infer");
    evaluate->add_option("--severity-column", ev_sev, "label column name");
    evaluate->add_option("--out", ev_out, "metrics output")->required();
    evaluate->add_option("--matrix", ev_matrix, "confusion heatmap SVG output");
    evaluate->callback([&] {
        const Model model = load_model(ev_model);
        const FeatureSchema schema = resolve_schema(ev_schema, ev_test, ev_sev);
        const CrashDataset test = load_csv(ev_test, schema, ev_sev);
        const EvaluationResult result = evaluate_model(model, test);
        save_metrics(result, ev_out);
        if (!ev_matrix.empty())
            save_confusion_svg(result.normalized,
                               std::string("Confusion matrix - ") + learner_name(model.kind()),
                               ev_matrix);
    });

    // ---- pipeline ------------------------------------------------------
    auto* pipeline = app.add_subcommand("pipeline", "End-to-end orchestration");
    pipeline->require_subcommand(1);
    auto* pipe_run = pipeline->add_subcommand("run", "Run every stage and emit the report bundle");
    std::string pr_config, pr_out;
    pipe_run->add_option("--config", pr_config, "pipeline config file")->required();
    pipe_run->add_option("--out", pr_out, "output directory (overrides run.out_dir)");
    pipe_run->callback([&] {
        PipelineConfig config = load_config(pr_config);
        if (!pr_out.empty()) config.out_dir = pr_out;
        run_pipeline(config);
        std::cout << "pipeline finished; artifacts in " << config.out_dir << '\n';
    });
    auto* pipe_defaults =
        pipeline->add_subcommand("defaults", "Write the default configuration");
    std::string pd_out;
    pipe_defaults->add_option("--out", pd_out, "config file to write (stdout when omitted)");
    pipe_defaults->callback([&] {
        if (pd_out.empty())
            save_config(PipelineConfig{}, std::cout);
        else
            save_config(PipelineConfig{}, pd_out);
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
