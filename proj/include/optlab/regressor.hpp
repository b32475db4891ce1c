#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "optlab/data_matrix.hpp"
#include "optlab/errors.hpp"
#include "optlab/threads.hpp"

namespace optlab {

// Uniform prediction contract shared by trained models and the closed-form
// benchmark pricers.
class Regressor {
public:
    virtual ~Regressor() = default;
    virtual std::string name() const = 0;
    virtual std::vector<double> predict(const DataMatrix& rows) const = 0;
};

// A fitted model: deterministic predictions plus training metadata and a
// versioned JSON artifact form.
class TrainedRegressor : public Regressor {
public:
    virtual nlohmann::json to_json() const = 0;
    std::uint64_t seed = 0;
};

// Row-parallel prediction over contiguous chunks. Output order matches the
// input rows regardless of thread count.
inline std::vector<double> predict_parallel(const Regressor& model, const DataMatrix& rows) {
    const std::size_t n = rows.rows();
    const std::size_t workers = std::min<std::size_t>(thread_count(), std::max<std::size_t>(n, 1));
    if (workers <= 1) return model.predict(rows);
    std::vector<std::vector<double>> parts(workers);
    parallel_for(workers, [&](std::size_t w) {
        const std::size_t begin = w * n / workers;
        const std::size_t end = (w + 1) * n / workers;
        std::vector<std::size_t> idx(end - begin);
        for (std::size_t i = begin; i < end; ++i) idx[i - begin] = i;
        parts[w] = model.predict(rows.select_rows(idx));
    });
    std::vector<double> out;
    out.reserve(n);
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

inline void check_schema(const std::vector<std::string>& expected,
                         const DataMatrix& rows) {
    if (expected == rows.columns()) return;
    std::string missing, extra;
    for (const auto& c : expected) {
        bool found = false;
        for (const auto& d : rows.columns()) {
            if (c == d) {
                found = true;
                break;
            }
        }
        if (!found) missing += (missing.empty() ? "" : ", ") + c;
    }
    for (const auto& d : rows.columns()) {
        bool found = false;
        for (const auto& c : expected) {
            if (c == d) {
                found = true;
                break;
            }
        }
        if (!found) extra += (extra.empty() ? "" : ", ") + d;
    }
    std::string msg = "feature schema mismatch";
    if (!missing.empty()) msg += "; missing: " + missing;
    if (!extra.empty()) msg += "; extra: " + extra;
    if (missing.empty() && extra.empty()) msg += "; column order differs";
    throw SchemaError(msg);
}

// ---------------------------------------------------------------------------
// Hyperparameter configs

struct MlpConfig {
    std::vector<int> hidden = {64, 64};
    double learning_rate = 1e-3;
    double l2 = 0.0;
    int batch_size = 128;
    int max_epochs = 1000;
    bool early_stopping = false;
    int patience = 20;

    void validate() const {
        if (hidden.empty()) throw InvalidArgument("MLP needs at least one hidden layer");
        for (int h : hidden) {
            if (h < 1) throw InvalidArgument("hidden layer width must be >= 1");
        }
        if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");
        if (l2 < 0.0) throw InvalidArgument("L2 penalty must be >= 0");
        if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
        if (max_epochs < 1) throw InvalidArgument("max epochs must be >= 1");
        if (patience < 1) throw InvalidArgument("patience must be >= 1");
    }
};

struct ForestConfig {
    int trees = 200;
    int max_depth = 16;  // < 0 means unbounded
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    double features_per_split = 1.0;  // fraction of columns considered per split
    bool bootstrap = true;

    void validate() const {
        if (trees < 1) throw InvalidArgument("tree count must be >= 1");
        if (min_samples_split < 2) throw InvalidArgument("min_samples_split must be >= 2");
        if (min_samples_leaf < 1) throw InvalidArgument("min_samples_leaf must be >= 1");
        if (!(features_per_split > 0.0 && features_per_split <= 1.0)) {
            throw InvalidArgument("features_per_split must be in (0, 1]");
        }
    }
};

struct GbmConfig {
    int iterations = 500;
    double learning_rate = 0.1;  // shrinkage
    int depth = 6;
    double l2_leaf = 3.0;
    int bins = 255;

    void validate() const {
        if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
        if (!(learning_rate >= 0.0)) throw InvalidArgument("learning rate must be >= 0");
        if (depth < 0) throw InvalidArgument("depth must be >= 0");
        if (l2_leaf < 0.0) throw InvalidArgument("L2 leaf regularization must be >= 0");
        if (bins < 2 || bins > 255) throw InvalidArgument("bins must be in [2, 255]");
    }
};

using RegressorConfig = std::variant<MlpConfig, ForestConfig, GbmConfig>;

inline std::string config_kind(const RegressorConfig& c) {
    if (std::holds_alternative<MlpConfig>(c)) return "mlp";
    if (std::holds_alternative<ForestConfig>(c)) return "forest";
    return "gbm";
}

inline nlohmann::json config_to_json(const RegressorConfig& c) {
    nlohmann::json j;
    j["kind"] = config_kind(c);
    if (const auto* m = std::get_if<MlpConfig>(&c)) {
        j["hidden"] = m->hidden;
        j["learning_rate"] = m->learning_rate;
        j["l2"] = m->l2;
        j["batch_size"] = m->batch_size;
        j["max_epochs"] = m->max_epochs;
        j["early_stopping"] = m->early_stopping;
        j["patience"] = m->patience;
    } else if (const auto* f = std::get_if<ForestConfig>(&c)) {
        j["trees"] = f->trees;
        j["max_depth"] = f->max_depth;
        j["min_samples_split"] = f->min_samples_split;
        j["min_samples_leaf"] = f->min_samples_leaf;
        j["features_per_split"] = f->features_per_split;
        j["bootstrap"] = f->bootstrap;
    } else if (const auto* g = std::get_if<GbmConfig>(&c)) {
        j["iterations"] = g->iterations;
        j["learning_rate"] = g->learning_rate;
        j["depth"] = g->depth;
        j["l2_leaf"] = g->l2_leaf;
        j["bins"] = g->bins;
    }
    return j;
}

inline RegressorConfig config_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind");
    if (kind == "mlp") {
        MlpConfig m;
        m.hidden = j.value("hidden", m.hidden);
        m.learning_rate = j.value("learning_rate", m.learning_rate);
        m.l2 = j.value("l2", m.l2);
        m.batch_size = j.value("batch_size", m.batch_size);
        m.max_epochs = j.value("max_epochs", m.max_epochs);
        m.early_stopping = j.value("early_stopping", m.early_stopping);
        m.patience = j.value("patience", m.patience);
        return m;
    }
    if (kind == "forest") {
        ForestConfig f;
        f.trees = j.value("trees", f.trees);
        f.max_depth = j.value("max_depth", f.max_depth);
        f.min_samples_split = j.value("min_samples_split", f.min_samples_split);
        f.min_samples_leaf = j.value("min_samples_leaf", f.min_samples_leaf);
        f.features_per_split = j.value("features_per_split", f.features_per_split);
        f.bootstrap = j.value("bootstrap", f.bootstrap);
        return f;
    }
    if (kind == "gbm") {
        GbmConfig g;
        g.iterations = j.value("iterations", g.iterations);
        g.learning_rate = j.value("learning_rate", g.learning_rate);
        g.depth = j.value("depth", g.depth);
        g.l2_leaf = j.value("l2_leaf", g.l2_leaf);
        g.bins = j.value("bins", g.bins);
        return g;
    }
    throw InvalidArgument("unknown regressor kind: " + kind);
}

}  // namespace optlab
