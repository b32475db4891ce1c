#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "optlab/regressor.hpp"

// Gradient boosting over oblivious (symmetric) regression trees: every node
// at a given depth shares one (feature, threshold) condition, so a depth-d
// tree is a table of 2^d leaves addressed by a d-bit path. Split candidates
// come from per-feature quantile histograms; leaf values are L2-regularized
// residual means.

namespace optlab {
namespace gbm {

struct ObliviousTree {
    std::vector<int> features;        // one per level
    std::vector<double> thresholds;   // go left (bit 0) iff x[f] <= threshold
    std::vector<double> leaves;       // 2^levels values

    std::size_t leaf_index(std::span<const double> x) const {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < features.size(); ++k) {
            idx = (idx << 1) | (x[features[k]] <= thresholds[k] ? 0u : 1u);
        }
        return idx;
    }

    double predict(std::span<const double> x) const { return leaves[leaf_index(x)]; }
};

// Quantile bin edges: candidate thresholds are data values at evenly spaced
// sorted positions, deduplicated. A value equal to an edge bins low.
inline std::vector<double> quantile_edges(const DataMatrix& data, std::size_t col, int bins) {
    std::vector<double> sorted(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) sorted[i] = data.at(i, col);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;
    for (int j = 1; j < bins; ++j) {
        const std::size_t pos = static_cast<std::size_t>(
            static_cast<std::uint64_t>(j) * sorted.size() / bins);
        if (pos == 0 || pos >= sorted.size()) continue;
        const double v = sorted[pos];
        if (edges.empty() || v > edges.back()) edges.push_back(v);
    }
    // drop a top edge that no value exceeds (it would produce an empty bin)
    while (!edges.empty() && edges.back() >= sorted.back()) edges.pop_back();
    return edges;
}

inline std::uint8_t bin_of(double x, const std::vector<double>& edges) {
    // first edge >= x; ties toward the lower bin
    const auto it = std::lower_bound(edges.begin(), edges.end(), x);
    return static_cast<std::uint8_t>(it - edges.begin());
}

}  // namespace gbm

class GbmModel final : public TrainedRegressor {
public:
    std::string name() const override { return "gbm"; }

    std::vector<double> predict(const DataMatrix& rows) const override {
        check_schema(schema_, rows);
        std::vector<double> out(rows.rows(), base_score_);
        for (std::size_t r = 0; r < rows.rows(); ++r) {
            const double* x = rows.row(r).data();
            double acc = 0.0;
            std::size_t level = 0, leaf_base = 0;
            for (const auto& t : trees_) {
                std::size_t idx = 0;
                const std::size_t depth = t.features.size();
                for (std::size_t k = 0; k < depth; ++k, ++level) {
                    idx = (idx << 1) |
                          static_cast<std::size_t>(x[eval_features_[level]] > eval_thresholds_[level]);
                }
                acc += eval_leaves_[leaf_base + idx];
                leaf_base += std::size_t{1} << depth;
            }
            out[r] += learning_rate_ * acc;
        }
        return out;
    }

    const std::vector<gbm::ObliviousTree>& trees() const { return trees_; }
    double base_score() const { return base_score_; }
    double learning_rate() const { return learning_rate_; }
    const std::vector<double>& training_loss() const { return training_loss_; }

    nlohmann::json to_json() const override {
        nlohmann::json j;
        j["format"] = "optlab-model";
        j["version"] = 1;
        j["kind"] = "gbm";
        j["schema"] = schema_;
        j["seed"] = seed;
        j["base_score"] = base_score_;
        j["learning_rate"] = learning_rate_;
        j["training_loss"] = training_loss_;
        j["trees"] = nlohmann::json::array();
        for (const auto& t : trees_) {
            j["trees"].push_back(
                {{"features", t.features}, {"thresholds", t.thresholds}, {"leaves", t.leaves}});
        }
        return j;
    }

    static std::unique_ptr<GbmModel> from_json(const nlohmann::json& j) {
        auto m = std::make_unique<GbmModel>();
        m->schema_ = j.at("schema").get<std::vector<std::string>>();
        m->seed = j.at("seed");
        m->base_score_ = j.at("base_score");
        m->learning_rate_ = j.at("learning_rate");
        m->training_loss_ = j.at("training_loss").get<std::vector<double>>();
        for (const auto& jt : j.at("trees")) {
            gbm::ObliviousTree t;
            t.features = jt.at("features").get<std::vector<int>>();
            t.thresholds = jt.at("thresholds").get<std::vector<double>>();
            t.leaves = jt.at("leaves").get<std::vector<double>>();
            m->trees_.push_back(std::move(t));
        }
        m->rebuild_eval_cache();
        return m;
    }

    friend std::unique_ptr<GbmModel> gbm_fit(const DataMatrix&, const GbmConfig&, std::uint64_t);

private:
    // Contiguous per-level arrays for the prediction hot loop. Built once
    // when the model is finalized, so predict stays const and shareable.
    void rebuild_eval_cache() const {
        eval_features_.clear();
        eval_thresholds_.clear();
        eval_leaves_.clear();
        eval_level_count_ = 0;
        for (const auto& t : trees_) {
            for (std::size_t k = 0; k < t.features.size(); ++k) {
                eval_features_.push_back(t.features[k]);
                eval_thresholds_.push_back(t.thresholds[k]);
            }
            eval_leaves_.insert(eval_leaves_.end(), t.leaves.begin(), t.leaves.end());
            eval_level_count_ += t.features.size();
        }
    }

    std::vector<std::string> schema_;
    std::vector<gbm::ObliviousTree> trees_;
    double base_score_ = 0.0;
    double learning_rate_ = 0.1;
    std::vector<double> training_loss_;
    mutable std::vector<int> eval_features_;
    mutable std::vector<double> eval_thresholds_;
    mutable std::vector<double> eval_leaves_;
    mutable std::size_t eval_level_count_ = 0;
};

// Squared-loss boosting: residual r = y - F, one oblivious tree per
// iteration, F += lr * tree. The initial score is the target mean. Split
// score maximizes sum^2/(count + l2) over the level's leaves; ties pick the
// lowest feature index, then the lowest threshold.
inline std::unique_ptr<GbmModel> gbm_fit(const DataMatrix& train, const GbmConfig& config,
                                         std::uint64_t seed) {
    config.validate();
    const std::size_t n = train.rows();
    if (n == 0) throw InvalidArgument("gbm_fit: empty training data");
    const std::size_t d = train.cols();

    auto model = std::make_unique<GbmModel>();
    model->schema_ = train.columns();
    model->seed = seed;
    model->learning_rate_ = config.learning_rate;

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += train.target(i);
    mean /= static_cast<double>(n);
    model->base_score_ = mean;

    // per-feature histogram codes
    std::vector<std::vector<double>> edges(d);
    std::vector<std::vector<std::uint8_t>> codes(d, std::vector<std::uint8_t>(n));
    for (std::size_t f = 0; f < d; ++f) {
        edges[f] = gbm::quantile_edges(train, f, config.bins);
        for (std::size_t i = 0; i < n; ++i) {
            codes[f][i] = gbm::bin_of(train.at(i, f), edges[f]);
        }
    }

    std::vector<double> residual(n);
    std::vector<double> fitted(n, mean);
    std::vector<std::uint32_t> leaf_of(n);
    const double lambda = config.l2_leaf;

    auto leaf_gain = [lambda](double sum, double cnt) {
        const double denom = cnt + lambda;
        return denom > 0.0 ? sum * sum / denom : 0.0;
    };

    for (int iter = 0; iter < config.iterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = train.target(i) - fitted[i];

        gbm::ObliviousTree tree;
        std::fill(leaf_of.begin(), leaf_of.end(), 0u);
        for (int level = 0; level < config.depth; ++level) {
            const std::size_t n_leaves = std::size_t{1} << level;
            int best_feature = -1;
            int best_edge = -1;
            double best_score = -std::numeric_limits<double>::infinity();
            for (std::size_t f = 0; f < d; ++f) {
                const std::size_t n_bins = edges[f].size() + 1;
                if (edges[f].empty()) continue;  // constant feature
                std::vector<double> sums(n_leaves * n_bins, 0.0);
                std::vector<double> cnts(n_leaves * n_bins, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    const std::size_t cell = leaf_of[i] * n_bins + codes[f][i];
                    sums[cell] += residual[i];
                    cnts[cell] += 1.0;
                }
                std::vector<double> total_sum(n_leaves, 0.0), total_cnt(n_leaves, 0.0);
                for (std::size_t leaf = 0; leaf < n_leaves; ++leaf) {
                    for (std::size_t b = 0; b < n_bins; ++b) {
                        total_sum[leaf] += sums[leaf * n_bins + b];
                        total_cnt[leaf] += cnts[leaf * n_bins + b];
                    }
                }
                std::vector<double> left_sum(n_leaves, 0.0), left_cnt(n_leaves, 0.0);
                for (std::size_t s = 0; s + 1 < n_bins; ++s) {
                    double score = 0.0;
                    for (std::size_t leaf = 0; leaf < n_leaves; ++leaf) {
                        left_sum[leaf] += sums[leaf * n_bins + s];
                        left_cnt[leaf] += cnts[leaf * n_bins + s];
                        score += leaf_gain(left_sum[leaf], left_cnt[leaf]) +
                                 leaf_gain(total_sum[leaf] - left_sum[leaf],
                                           total_cnt[leaf] - left_cnt[leaf]);
                    }
                    if (score > best_score) {
                        best_score = score;
                        best_feature = static_cast<int>(f);
                        best_edge = static_cast<int>(s);
                    }
                }
            }
            if (best_feature < 0) break;  // nothing left to split on
            tree.features.push_back(best_feature);
            tree.thresholds.push_back(edges[best_feature][best_edge]);
            for (std::size_t i = 0; i < n; ++i) {
                const unsigned bit = codes[best_feature][i] <= best_edge ? 0u : 1u;
                leaf_of[i] = (leaf_of[i] << 1) | bit;
            }
        }

        const std::size_t n_leaves = std::size_t{1} << tree.features.size();
        std::vector<double> sums(n_leaves, 0.0), cnts(n_leaves, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            sums[leaf_of[i]] += residual[i];
            cnts[leaf_of[i]] += 1.0;
        }
        tree.leaves.resize(n_leaves);
        for (std::size_t leaf = 0; leaf < n_leaves; ++leaf) {
            const double denom = cnts[leaf] + lambda;
            tree.leaves[leaf] = denom > 0.0 ? sums[leaf] / denom : 0.0;
        }

        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            fitted[i] += config.learning_rate * tree.leaves[leaf_of[i]];
            const double rnew = train.target(i) - fitted[i];
            loss += rnew * rnew;
        }
        model->training_loss_.push_back(loss / static_cast<double>(n));
        model->trees_.push_back(std::move(tree));
    }
    model->rebuild_eval_cache();
    return model;
}

}  // namespace optlab
