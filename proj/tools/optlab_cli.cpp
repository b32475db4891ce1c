// optlab command line: reproducible option-pricing experiments comparing
// closed-form benchmarks with from-scratch ML regressors.
//
//   optlab generate   write a stage dataset (CSV + JSON manifest)
//   optlab train      fit one model on a dataset, optionally tuned
//   optlab evaluate   metrics for models/benchmarks on a dataset
//   optlab bench      wall-clock prediction timing table
//   optlab reproduce  full stage pipeline into a run directory
//
// All randomness flows from --seed; OPTLAB_THREADS caps worker threads.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optlab/experiment.hpp"

using namespace optlab;

namespace {

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        if (comma == std::string::npos) comma = csv.size();
        if (comma > start) out.push_back(csv.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

struct LoadedModels {
    std::vector<std::unique_ptr<Regressor>> owned;
    std::vector<const Regressor*> all;
};

LoadedModels gather_models(const std::vector<std::string>& artifact_paths,
                           const std::string& benchmarks, const ExperimentConfig& cfg) {
    LoadedModels out;
    for (const auto& name : split_list(benchmarks)) {
        if (name == "bs") {
            out.owned.push_back(std::make_unique<BsBenchmark>());
        } else if (name == "heston") {
            out.owned.push_back(std::make_unique<HestonBenchmark>(cfg.heston));
        } else {
            throw InvalidArgument("unknown benchmark: " + name + " (use bs, heston)");
        }
    }
    for (const auto& path : artifact_paths) out.owned.push_back(load_model(path));
    for (const auto& m : out.owned) out.all.push_back(m.get());
    return out;
}

int cmd_generate(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    auto stage = build_stage_data(cfg);
    stage.data.write_csv(cfg.out_dir / "dataset.csv");
    write_file_atomic(cfg.out_dir / "dataset.manifest.json", stage.manifest.dump(2) + "\n");
    std::printf("wrote %zu rows to %s\n", stage.data.rows(),
                (cfg.out_dir / "dataset.csv").c_str());
    return 0;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& data_path,
              const std::string& kind, const std::string& model_out,
              const std::string& trials_out) {
    const auto data = DataMatrix::read_csv(data_path);
    data.ensure_finite_targets();
    auto fitted = train_model(cfg, kind, data);
    save_model(*fitted.model, model_out);
    std::printf("wrote %s (fit %.3f s)\n", model_out.c_str(), fitted.fit_seconds);
    if (fitted.trials) {
        const std::string path = trials_out.empty() ? model_out + ".trials.json" : trials_out;
        write_file_atomic(path, fitted.trials->to_json().dump(2) + "\n");
        std::printf("wrote %s (%zu trials)\n", path.c_str(), fitted.trials->trials.size());
    }
    return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg, const std::string& data_path,
                 const std::vector<std::string>& artifacts, const std::string& benchmarks,
                 const std::string& bins, bool bench, int reps) {
    const auto data = DataMatrix::read_csv(data_path);
    data.ensure_finite_targets();
    auto models = gather_models(artifacts, benchmarks, cfg);
    if (models.all.empty()) throw InvalidArgument("nothing to evaluate: no models, no benchmarks");

    std::vector<MetricsReport> reports;
    for (const auto* model : models.all) {
        const auto preds = model->predict(data);
        auto rep = compute_report(model->name(), data_path, data, preds);
        for (const auto& dim : split_list(bins)) {
            const auto column = bin_column_for(dim);
            rep.bins.push_back(binned_mae(data, preds, column, default_bin_edges(data, column)));
            rep.bins.back().dimension = dim;
        }
        if (bench) {
            Timing t;
            t.predict_seconds = benchmark_predict([&] { model->predict(data); }, reps);
            t.rows_timed = data.rows();
            rep.timing = t;
        }
        reports.push_back(std::move(rep));
        std::printf("%-14s mse=%-12.6g mae=%-12.6g r2=%.6f\n", reports.back().model.c_str(),
                    reports.back().mse, reports.back().mae, reports.back().r2);
    }
    std::filesystem::create_directories(cfg.out_dir);
    emit_report(reports, cfg.out_dir);
    std::printf("reports in %s\n", cfg.out_dir.c_str());
    return 0;
}

int cmd_bench(const ExperimentConfig& cfg, const std::string& data_path,
              const std::vector<std::string>& artifacts, const std::string& benchmarks,
              int reps, bool fit_defaults, bool parallel) {
    const auto data = DataMatrix::read_csv(data_path);
    auto models = gather_models(artifacts, benchmarks, cfg);
    std::printf("%-14s %14s %14s %12s\n", "model", "fit (s)", "predict (s)", "ns/row");
    for (const auto* model : models.all) {
        const double predict_s =
            parallel ? benchmark_predict([&] { predict_parallel(*model, data); }, reps)
                     : benchmark_predict([&] { model->predict(data); }, reps);
        std::string fit_str = "N/A";
        if (fit_defaults && (model->name() == "mlp" || model->name() == "forest" ||
                             model->name() == "gbm")) {
            ExperimentConfig fit_cfg = cfg;
            fit_cfg.tune = false;
            const auto t0 = std::chrono::steady_clock::now();
            train_model(fit_cfg, model->name(), data);
            fit_str = format_double(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        std::printf("%-14s %14s %14.6f %12.1f\n", model->name().c_str(), fit_str.c_str(),
                    predict_s, predict_s / static_cast<double>(data.rows()) * 1e9);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"option pricing benchmark lab"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::string config_file;
    app.add_option("--config", config_file, "TOML-style key = value config file");

    // flag overrides shared across subcommands; applied after the file
    std::vector<std::pair<std::string, std::string>> overrides;
    auto add_override = [&](CLI::App* sub, const char* flag, const char* key,
                            const char* help) {
        sub->add_option_function<std::string>(
            flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
            help);
    };
    auto add_common = [&](CLI::App* sub) {
        sub->fallthrough();  // lets --config (a parent option) follow the subcommand
        add_override(sub, "--stage", "stage", "experiment stage: 1, 2 or 3");
        add_override(sub, "--pricer", "pricer", "synthetic pricer: bs or heston");
        add_override(sub, "--n", "n", "synthetic sample size");
        add_override(sub, "--seed", "seed", "root seed");
        add_override(sub, "--noise-std", "noise_std", "stage-1 noise standard deviation");
        add_override(sub, "--amplitude", "amplitude", "stage-2 sinusoidal amplitude");
        add_override(sub, "--out", "out", "output directory");
        add_override(sub, "--chain", "chain", "stage-3 option chain CSV");
        add_override(sub, "--curve", "curve", "stage-3 par-yield curve CSV");
        add_override(sub, "--spot", "spot", "stage-3 spot price");
        add_override(sub, "--valuation-date", "valuation_date", "stage-3 valuation date (ISO)");
        add_override(sub, "--test-fraction", "test_fraction", "holdout fraction");
        add_override(sub, "--mlp-epochs", "mlp_epochs", "epoch cap for pipeline MLP fits");
        add_override(sub, "--mlp-batch", "mlp_batch", "batch size for pipeline MLP fits");
    };

    auto* generate = app.add_subcommand("generate", "write a stage dataset + manifest");
    add_common(generate);

    auto* train = app.add_subcommand("train", "fit a model on a dataset CSV");
    train->fallthrough();
    std::string train_data, train_kind, train_out = "model.json", train_trials;
    bool no_tune = false;
    int budget = -1;
    train->add_option("--data", train_data, "dataset CSV")->required();
    train->add_option("--model", train_kind, "mlp | forest | gbm")->required();
    train->add_option("--out", train_out, "model artifact path");
    train->add_option("--trials", train_trials, "trial log path (tuned runs)");
    train->add_flag("--no-tune", no_tune, "fit the default config, skip the search");
    train->add_option("--budget", budget, "tuning trial budget");
    add_override(train, "--seed", "seed", "root seed");
    add_override(train, "--mlp-epochs", "mlp_epochs", "epoch cap for tuned MLP fits");
    add_override(train, "--mlp-batch", "mlp_batch", "batch size for tuned MLP fits");

    auto* evaluate = app.add_subcommand("evaluate", "metrics for models on a dataset CSV");
    std::string eval_data, eval_benchmarks, eval_bins;
    std::vector<std::string> eval_models;
    bool eval_bench = false;
    int eval_reps = 7;
    evaluate->add_option("--data", eval_data, "dataset CSV")->required();
    evaluate->add_option("--models", eval_models, "model artifact paths")->delimiter(',');
    evaluate->add_option("--benchmarks", eval_benchmarks, "comma list: bs,heston");
    evaluate->add_option("--bins", eval_bins, "comma list: strike,maturity,vol");
    evaluate->add_flag("--bench", eval_bench, "add prediction timing to reports");
    evaluate->add_option("--reps", eval_reps, "timing repetitions (>= 3)");
    add_common(evaluate);

    auto* bench = app.add_subcommand("bench", "prediction timing table");
    std::string bench_data, bench_benchmarks = "bs,heston";
    std::vector<std::string> bench_models;
    int bench_reps = 9;
    bool bench_fit = false;
    bool bench_parallel = false;
    bench->add_option("--data", bench_data, "dataset CSV")->required();
    bench->add_option("--models", bench_models, "model artifact paths")->delimiter(',');
    bench->add_option("--benchmarks", bench_benchmarks, "comma list: bs,heston");
    bench->add_option("--reps", bench_reps, "timing repetitions (>= 3)");
    bench->add_flag("--fit", bench_fit, "also time a default-config fit per model kind");
    bench->add_flag("--parallel", bench_parallel,
                    "time row-parallel prediction (default is single-threaded)");
    add_common(bench);

    auto* reproduce = app.add_subcommand("reproduce", "run a full stage pipeline");
    std::string budgets;
    add_common(reproduce);
    reproduce->add_option_function<std::string>(
        "--budget-mlp", [&](const std::string& v) { overrides.emplace_back("budget.mlp", v); },
        "MLP tuning budget");
    reproduce->add_option_function<std::string>(
        "--budget-forest",
        [&](const std::string& v) { overrides.emplace_back("budget.forest", v); },
        "forest tuning budget");
    reproduce->add_option_function<std::string>(
        "--budget-gbm", [&](const std::string& v) { overrides.emplace_back("budget.gbm", v); },
        "GBM tuning budget");
    reproduce->add_flag_function(
        "--no-tune", [&](std::int64_t) { overrides.emplace_back("tune", "false"); },
        "default configs, no hyperparameter search");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version exit cleanly, bad flags are config errors
    }

    try {
        if (!config_file.empty()) load_config_file(cfg, config_file);
        for (const auto& [key, value] : overrides) apply_config_entry(cfg, key, value);

        if (app.got_subcommand(generate)) return cmd_generate(cfg);
        if (app.got_subcommand(train)) {
            cfg.tune = !no_tune;
            if (budget >= 0) {
                cfg.budget_mlp = cfg.budget_forest = cfg.budget_gbm = budget;
            }
            return cmd_train(cfg, train_data, train_kind, train_out, train_trials);
        }
        if (app.got_subcommand(evaluate)) {
            return cmd_evaluate(cfg, eval_data, eval_models, eval_benchmarks, eval_bins,
                                eval_bench, eval_reps);
        }
        if (app.got_subcommand(bench)) {
            return cmd_bench(cfg, bench_data, bench_models, bench_benchmarks, bench_reps,
                             bench_fit, bench_parallel);
        }
        if (app.got_subcommand(reproduce)) {
            run_reproduce(cfg);
            std::printf("run complete: %s\n", cfg.out_dir.c_str());
            return 0;
        }
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const SchemaError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 0;
}
