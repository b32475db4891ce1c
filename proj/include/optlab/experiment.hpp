#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "optlab/benchmarks.hpp"
#include "optlab/features.hpp"
#include "optlab/learners.hpp"
#include "optlab/market.hpp"
#include "optlab/metrics.hpp"
#include "optlab/synthetic.hpp"
#include "optlab/tuning.hpp"

// Manifest-driven experiment runs: stage datasets, shared splits, tuned or
// default model fits and benchmark evaluation, reproducible from one root
// seed. Used by the CLI subcommands and the acceptance suite.

namespace optlab {

struct ExperimentConfig {
    int stage = 1;               // 1 gaussian, 2 sinusoidal, 3 market snapshot
    std::string pricer = "bs";   // synthetic stages: bs | heston
    double noise_std = 0.0975;
    double amplitude = 0.2;
    std::uint64_t sample_size = 20000;
    std::uint64_t seed = 42;
    double test_fraction = 0.2;
    bool tune = true;
    int budget_mlp = -1;     // -1 picks the per-model default
    int budget_forest = -1;
    int budget_gbm = -1;
    // desk-scale caps applied to tuned MLP trials; raise for full runs
    int mlp_epochs = 150;
    int mlp_batch = 128;
    bool standardize = false;
    FeatureSpec features;
    std::filesystem::path out_dir = "run";
    // stage 3 inputs
    std::filesystem::path chain_file = "data/aapl_chain_2025-01-02.csv";
    std::filesystem::path curve_file = "data/treasury_par_yields_2025-01-02.csv";
    double spot = 243.85;
    std::string valuation_date = "2025-01-02";
    HestonParams heston;       // generator (stage 1-2) and benchmark parameters
    GridSpec grid;

    void validate() const {
        if (stage < 1 || stage > 3) throw InvalidArgument("stage must be 1, 2 or 3");
        if (pricer != "bs" && pricer != "heston") {
            throw InvalidArgument("pricer must be bs or heston");
        }
        if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
            throw InvalidArgument("test_fraction must be in (0, 1)");
        }
        if (noise_std < 0.0) throw InvalidArgument("noise_std must be >= 0");
        if (mlp_epochs < 1 || mlp_batch < 1) throw InvalidArgument("mlp caps must be >= 1");
        heston.validate();
        grid.validate();
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["stage"] = stage;
        j["pricer"] = pricer;
        j["noise_std"] = noise_std;
        j["amplitude"] = amplitude;
        j["n"] = sample_size;
        j["seed"] = seed;
        j["test_fraction"] = test_fraction;
        j["tune"] = tune;
        j["budget"] = {{"mlp", budget_mlp}, {"forest", budget_forest}, {"gbm", budget_gbm}};
        j["mlp_epochs"] = mlp_epochs;
        j["mlp_batch"] = mlp_batch;
        j["standardize"] = standardize;
        j["chain"] = chain_file.string();
        j["curve"] = curve_file.string();
        j["spot"] = spot;
        j["valuation_date"] = valuation_date;
        j["heston"] = {{"v0", heston.v0},
                       {"kappa", heston.kappa},
                       {"theta", heston.theta},
                       {"sigma_v", heston.sigma_v},
                       {"rho", heston.rho}};
        return j;
    }
};

// Single `key = value` assignment, shared by the config file parser and the
// CLI flag overrides (flags win by being applied second).
inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
    auto as_u64 = [&] { return static_cast<std::uint64_t>(std::stoull(value)); };
    auto as_int = [&] { return std::stoi(value); };
    auto as_double = [&] { return std::stod(value); };
    auto as_bool = [&] {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        throw InvalidArgument("config key " + key + " expects true/false");
    };
    try {
        if (key == "stage") cfg.stage = as_int();
        else if (key == "pricer") cfg.pricer = value;
        else if (key == "noise_std") cfg.noise_std = as_double();
        else if (key == "amplitude") cfg.amplitude = as_double();
        else if (key == "n") cfg.sample_size = as_u64();
        else if (key == "seed") cfg.seed = as_u64();
        else if (key == "test_fraction") cfg.test_fraction = as_double();
        else if (key == "tune") cfg.tune = as_bool();
        else if (key == "budget.mlp") cfg.budget_mlp = as_int();
        else if (key == "budget.forest") cfg.budget_forest = as_int();
        else if (key == "budget.gbm") cfg.budget_gbm = as_int();
        else if (key == "mlp_epochs") cfg.mlp_epochs = as_int();
        else if (key == "mlp_batch") cfg.mlp_batch = as_int();
        else if (key == "standardize") cfg.standardize = as_bool();
        else if (key == "out") cfg.out_dir = value;
        else if (key == "chain") cfg.chain_file = value;
        else if (key == "curve") cfg.curve_file = value;
        else if (key == "spot") cfg.spot = as_double();
        else if (key == "valuation_date") cfg.valuation_date = value;
        else if (key == "heston.v0") cfg.heston.v0 = as_double();
        else if (key == "heston.kappa") cfg.heston.kappa = as_double();
        else if (key == "heston.theta") cfg.heston.theta = as_double();
        else if (key == "heston.sigma_v") cfg.heston.sigma_v = as_double();
        else if (key == "heston.rho") cfg.heston.rho = as_double();
        else throw InvalidArgument("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
        throw InvalidArgument("bad value for config key " + key + ": " + value);
    } catch (const std::out_of_range&) {
        throw InvalidArgument("value out of range for config key " + key + ": " + value);
    }
}

// Flat TOML-style `key = value` file: # comments, optional quotes on values.
inline void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument(path.string() + " line " + std::to_string(line_no) +
                                  ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        apply_config_entry(cfg, key, value);
    }
}

struct StageData {
    DataMatrix data;
    std::string dataset_id;
    nlohmann::json manifest;
};

inline StageData build_stage_data(const ExperimentConfig& cfg) {
    cfg.validate();
    StageData out;
    if (cfg.stage == 3) {
        const auto chain = load_option_chain(cfg.chain_file);
        const auto curve = load_yield_curve(cfg.curve_file);
        out.data = build_market_dataset(chain.quotes, curve, cfg.spot,
                                        Date::parse_iso(cfg.valuation_date));
        out.dataset_id = "stage3-market";
        out.manifest = {{"kind", "market"},
                        {"chain", cfg.chain_file.string()},
                        {"curve", cfg.curve_file.string()},
                        {"spot", cfg.spot},
                        {"valuation_date", cfg.valuation_date},
                        {"rows", out.data.rows()},
                        {"quotes_dropped", chain.dropped}};
        return out;
    }
    DatasetManifest m;
    m.seed = cfg.seed;
    m.pricer = cfg.pricer;
    m.heston = cfg.heston;
    m.distortion = cfg.stage == 1 ? Distortion::Gaussian : Distortion::Sinusoidal;
    m.noise_std = cfg.noise_std;
    m.amplitude = cfg.amplitude;
    m.rows = cfg.sample_size;
    m.grid = cfg.grid;
    out.data = generate_dataset(m);
    out.dataset_id = "stage" + std::to_string(cfg.stage) + "-" + cfg.pricer;
    out.manifest = m.to_json();
    return out;
}

// Desk-scale search spaces used by the pipeline. The MLP space additionally
// honors the configured epoch/batch caps.
inline SearchSpace pipeline_search_space(const ExperimentConfig& cfg, const std::string& kind) {
    SearchSpace space = default_search_space(kind);
    if (kind == "mlp") {
        space.base["max_epochs"] = cfg.mlp_epochs;
        space.base["batch_size"] = cfg.mlp_batch;
    }
    return space;
}

struct FittedModel {
    std::string kind;
    std::unique_ptr<TrainedRegressor> model;
    std::optional<TrialLog> trials;
    double fit_seconds = 0.0;
};

inline FittedModel train_model(const ExperimentConfig& cfg, const std::string& kind,
                               const DataMatrix& train) {
    FittedModel out;
    out.kind = kind;
    RegressorConfig config;
    if (kind == "mlp") {
        MlpConfig m;
        m.max_epochs = cfg.mlp_epochs;
        m.batch_size = cfg.mlp_batch;
        config = m;
    } else if (kind == "forest") {
        config = ForestConfig{};
    } else if (kind == "gbm") {
        config = GbmConfig{};
    } else {
        throw InvalidArgument("unknown model kind: " + kind);
    }
    if (cfg.tune) {
        int budget = kind == "mlp"      ? cfg.budget_mlp
                     : kind == "forest" ? cfg.budget_forest
                                        : cfg.budget_gbm;
        if (budget < 0) budget = default_budget(kind);
        out.trials = random_search(pipeline_search_space(cfg, kind), budget, train,
                                   derive_seed(cfg.seed, "tune-" + kind));
        config = out.trials->best_config();
    }
    const auto t0 = std::chrono::steady_clock::now();
    out.model = fit_regressor(train, config, derive_seed(cfg.seed, "fit-" + kind));
    out.fit_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

inline std::vector<double> default_bin_edges(const DataMatrix& rows, const std::string& column) {
    const int c = rows.column_index(column);
    if (c < 0) throw SchemaError("no column " + column + " to bin on");
    std::vector<double> values(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) values[i] = rows.at(i, c);
    return equal_width_edges(values, 10);
}

inline std::string bin_column_for(const std::string& dimension) {
    if (dimension == "strike") return "K";
    if (dimension == "maturity") return "T";
    if (dimension == "vol") return "sigma";
    throw InvalidArgument("unknown bin dimension: " + dimension + " (use strike, maturity, vol)");
}

// Full stage pipeline: dataset, shared split, three models, two benchmarks,
// reports. Timing is deliberately excluded so reruns are byte-identical.
inline void run_reproduce(const ExperimentConfig& cfg) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    write_file_atomic(cfg.out_dir / "config.json", cfg.to_json().dump(2) + "\n");

    auto stage = build_stage_data(cfg);
    stage.data.write_csv(cfg.out_dir / "dataset.csv");
    write_file_atomic(cfg.out_dir / "dataset.manifest.json", stage.manifest.dump(2) + "\n");

    auto working = engineer_features(stage.data, cfg.features);
    const auto split = train_test_split(working, cfg.test_fraction,
                                        derive_seed(cfg.seed, "split"));
    DataMatrix train = split.train;
    DataMatrix test = split.test;
    if (cfg.standardize) {
        const auto scaler = standardize_fit(split.train);
        train = standardize_apply(split.train, scaler);
        test = standardize_apply(split.test, scaler);
    }

    std::vector<MetricsReport> reports;
    const BsBenchmark bs;
    const HestonBenchmark heston(cfg.heston);
    // benchmarks read raw pricing columns, so they evaluate the raw split
    reports.push_back(compute_report(bs.name(), stage.dataset_id, split.test,
                                     bs.predict(split.test)));
    reports.push_back(compute_report(heston.name(), stage.dataset_id, split.test,
                                     heston.predict(split.test)));

    for (const std::string kind : {"mlp", "forest", "gbm"}) {
        auto fitted = train_model(cfg, kind, train);
        save_model(*fitted.model, cfg.out_dir / (kind + ".model.json"));
        if (fitted.trials) {
            write_file_atomic(cfg.out_dir / (kind + ".trials.json"),
                              fitted.trials->to_json().dump(2) + "\n");
        }
        reports.push_back(
            compute_report(kind, stage.dataset_id, test, fitted.model->predict(test)));
    }
    emit_report(reports, cfg.out_dir);
}

}  // namespace optlab
