#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "optlab/features.hpp"
#include "optlab/learners.hpp"
#include "optlab/metrics.hpp"
#include "optlab/rng.hpp"

// Seeded randomized hyperparameter search: sample configs i.i.d. from a
// declared space, score each on an inner 80/20 holdout of the training data,
// keep the lowest validation MSE (earliest trial wins ties).

namespace optlab {

struct CategoricalInt {
    std::string key;
    std::vector<int> values;
};

struct CategoricalLayers {
    std::string key;
    std::vector<std::vector<int>> values;
};

struct LogUniformReal {
    std::string key;
    double lo = 0.0;
    double hi = 0.0;
};

using ParamDist = std::variant<CategoricalInt, CategoricalLayers, LogUniformReal>;

struct SearchSpace {
    std::string kind;  // "mlp" | "forest" | "gbm"
    nlohmann::json base;  // fixed fields every sampled config starts from
    std::vector<ParamDist> params;

    RegressorConfig sample(Rng& rng) const {
        nlohmann::json j = base;
        j["kind"] = kind;
        for (const auto& p : params) {
            if (const auto* c = std::get_if<CategoricalInt>(&p)) {
                j[c->key] = c->values[rng.below(c->values.size())];
            } else if (const auto* l = std::get_if<CategoricalLayers>(&p)) {
                j[l->key] = l->values[rng.below(l->values.size())];
            } else {
                const auto& u = std::get<LogUniformReal>(p);
                j[u.key] = rng.log_uniform(u.lo, u.hi);
            }
        }
        return config_from_json(j);
    }
};

// Default spaces. Hidden layout is depth x width with both sampled
// independently; tree depth -1 stands for unbounded.
inline SearchSpace default_search_space(const std::string& kind) {
    SearchSpace s;
    s.kind = kind;
    if (kind == "mlp") {
        s.params.push_back(CategoricalLayers{
            "hidden",
            {{32}, {64}, {128}, {32, 32}, {64, 64}, {128, 128},
             {32, 32, 32}, {64, 64, 64}, {128, 128, 128}}});
        s.params.push_back(LogUniformReal{"learning_rate", 1e-4, 1e-2});
        s.params.push_back(LogUniformReal{"l2", 1e-6, 1e-2});
        return s;
    }
    if (kind == "forest") {
        s.params.push_back(CategoricalInt{"trees", {100, 200, 400}});
        s.params.push_back(CategoricalInt{"max_depth", {8, 12, 16, -1}});
        s.params.push_back(CategoricalInt{"min_samples_split", {2, 5, 10}});
        s.params.push_back(CategoricalInt{"min_samples_leaf", {1, 2, 4}});
        return s;
    }
    if (kind == "gbm") {
        s.params.push_back(CategoricalInt{"iterations", {200, 500, 1000}});
        s.params.push_back(CategoricalInt{"depth", {4, 6, 8}});
        s.params.push_back(LogUniformReal{"learning_rate", 0.01, 0.3});
        s.params.push_back(LogUniformReal{"l2_leaf", 0.1, 10.0});
        return s;
    }
    throw InvalidArgument("unknown search space kind: " + kind);
}

inline int default_budget(const std::string& kind) {
    if (kind == "mlp") return 25;
    if (kind == "forest") return 25;
    if (kind == "gbm") return 40;
    throw InvalidArgument("unknown model kind: " + kind);
}

struct Trial {
    RegressorConfig config;
    double validation_mse = std::numeric_limits<double>::quiet_NaN();
    double fit_seconds = 0.0;
    std::string error;  // empty on success

    bool ok() const { return error.empty(); }
};

struct TrialLog {
    std::vector<Trial> trials;
    std::size_t best_index = 0;

    const RegressorConfig& best_config() const { return trials.at(best_index).config; }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["best_index"] = best_index;
        j["trials"] = nlohmann::json::array();
        for (const auto& t : trials) {
            nlohmann::json jt;
            jt["config"] = config_to_json(t.config);
            if (t.ok()) {
                jt["validation_mse"] = t.validation_mse;
            } else {
                jt["validation_mse"] = nullptr;
                jt["error"] = t.error;
            }
            jt["fit_seconds"] = t.fit_seconds;
            j["trials"].push_back(jt);
        }
        return j;
    }
};

inline TrialLog random_search(const SearchSpace& space, int budget, const DataMatrix& train,
                              std::uint64_t seed) {
    if (budget < 1) throw InvalidArgument("search budget must be >= 1");
    // one shared inner split keeps trials comparable
    const auto inner = train_test_split(train, 0.2, derive_seed(seed, "tune-split"));
    Rng sampler(derive_seed(seed, "tune-sample"));

    TrialLog log;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < budget; ++i) {
        Trial trial;
        trial.config = space.sample(sampler);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto model =
                fit_regressor(inner.train, trial.config, derive_seed(seed, "tune-fit", i));
            trial.validation_mse = mse(inner.test.targets(), model->predict(inner.test));
        } catch (const std::exception& e) {
            trial.error = e.what();
        }
        trial.fit_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (trial.ok() && trial.validation_mse < best) {
            best = trial.validation_mse;
            log.best_index = log.trials.size();
        }
        log.trials.push_back(std::move(trial));
    }
    if (!std::isfinite(best)) {
        std::string causes;
        for (std::size_t i = 0; i < log.trials.size(); ++i) {
            causes += "\n  trial " + std::to_string(i) + ": " + log.trials[i].error;
        }
        throw TuningError("every tuning trial failed:" + causes);
    }
    return log;
}

}  // namespace optlab
