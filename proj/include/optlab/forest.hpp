#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "optlab/regressor.hpp"
#include "optlab/rng.hpp"
#include "optlab/threads.hpp"

// Bagged CART regression forest: each tree grows on a bootstrap resample with
// a random feature subset considered at every split; prediction is the mean
// of tree outputs.

namespace optlab {
namespace forest {

struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<Node> nodes;

    double predict(std::span<const double> x) const {
        int cur = 0;
        while (nodes[cur].feature >= 0) {
            cur = (x[nodes[cur].feature] <= nodes[cur].threshold) ? nodes[cur].left
                                                                  : nodes[cur].right;
        }
        return nodes[cur].value;
    }
};

struct Builder {
    const DataMatrix& data;
    const ForestConfig& cfg;
    Rng rng;
    Tree tree;
    std::vector<std::size_t> indices;            // working index buffer
    std::vector<std::pair<double, double>> scratch;  // (feature value, target)

    Builder(const DataMatrix& d, const ForestConfig& c, std::uint64_t seed)
        : data(d), cfg(c), rng(seed) {}

    // Variance-reduction split: maximize sum_L^2/n_L + sum_R^2/n_R. Ties go
    // to the lowest feature index, then the lowest threshold.
    struct Split {
        bool found = false;
        int feature = -1;
        double threshold = 0.0;
        double score = -std::numeric_limits<double>::infinity();
    };

    Split best_split(std::size_t begin, std::size_t end) {
        Split best;
        const std::size_t n = end - begin;
        const int d = static_cast<int>(data.cols());
        int m = static_cast<int>(std::lround(cfg.features_per_split * d));
        m = std::clamp(m, 1, d);
        std::vector<int> feats(d);
        std::iota(feats.begin(), feats.end(), 0);
        for (int i = 0; i < m; ++i) {
            const int j = i + static_cast<int>(rng.below(d - i));
            std::swap(feats[i], feats[j]);
        }
        feats.resize(m);
        std::sort(feats.begin(), feats.end());

        for (int f : feats) {
            scratch.clear();
            double total = 0.0;
            for (std::size_t k = begin; k < end; ++k) {
                const double y = data.target(indices[k]);
                scratch.emplace_back(data.at(indices[k], f), y);
                total += y;
            }
            std::sort(scratch.begin(), scratch.end());
            double left_sum = 0.0;
            const auto min_leaf = static_cast<std::size_t>(cfg.min_samples_leaf);
            for (std::size_t k = 0; k + 1 < n; ++k) {
                left_sum += scratch[k].second;
                const std::size_t nl = k + 1, nr = n - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                if (scratch[k + 1].first <= scratch[k].first) continue;  // no boundary here
                const double right_sum = total - left_sum;
                const double score = left_sum * left_sum / static_cast<double>(nl) +
                                     right_sum * right_sum / static_cast<double>(nr);
                if (score > best.score) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = 0.5 * (scratch[k].first + scratch[k + 1].first);
                    best.score = score;
                }
            }
        }
        return best;
    }

    int build(std::size_t begin, std::size_t end, int depth) {
        const std::size_t n = end - begin;
        double sum = 0.0;
        for (std::size_t k = begin; k < end; ++k) sum += data.target(indices[k]);
        const double mean = sum / static_cast<double>(n);

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[node_id].value = mean;

        const bool depth_ok = cfg.max_depth < 0 || depth < cfg.max_depth;
        if (!depth_ok || n < static_cast<std::size_t>(cfg.min_samples_split)) return node_id;

        const Split split = best_split(begin, end);
        if (!split.found) return node_id;

        // partition in place, stable on original order within each side
        std::vector<std::size_t> left, right;
        for (std::size_t k = begin; k < end; ++k) {
            if (data.at(indices[k], split.feature) <= split.threshold) {
                left.push_back(indices[k]);
            } else {
                right.push_back(indices[k]);
            }
        }
        std::copy(left.begin(), left.end(), indices.begin() + begin);
        std::copy(right.begin(), right.end(), indices.begin() + begin + left.size());

        tree.nodes[node_id].feature = split.feature;
        tree.nodes[node_id].threshold = split.threshold;
        const int l = build(begin, begin + left.size(), depth + 1);
        const int r = build(begin + left.size(), end, depth + 1);
        tree.nodes[node_id].left = l;
        tree.nodes[node_id].right = r;
        return node_id;
    }

    Tree run() {
        const std::size_t n = data.rows();
        indices.resize(n);
        if (cfg.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) indices[i] = rng.below(n);
        } else {
            std::iota(indices.begin(), indices.end(), std::size_t{0});
        }
        build(0, n, 0);
        return std::move(tree);
    }
};

}  // namespace forest

class ForestModel final : public TrainedRegressor {
public:
    std::string name() const override { return "forest"; }

    std::vector<double> predict(const DataMatrix& rows) const override {
        check_schema(schema_, rows);
        std::vector<double> out(rows.rows(), 0.0);
        for (std::size_t r = 0; r < rows.rows(); ++r) {
            double acc = 0.0;
            for (const auto& t : trees_) acc += t.predict(rows.row(r));
            out[r] = acc / static_cast<double>(trees_.size());
        }
        return out;
    }

    double tree_predict(std::size_t tree, std::span<const double> x) const {
        return trees_.at(tree).predict(x);
    }
    std::size_t tree_count() const { return trees_.size(); }

    nlohmann::json to_json() const override {
        nlohmann::json j;
        j["format"] = "optlab-model";
        j["version"] = 1;
        j["kind"] = "forest";
        j["schema"] = schema_;
        j["seed"] = seed;
        j["trees"] = nlohmann::json::array();
        for (const auto& t : trees_) {
            nlohmann::json jt = nlohmann::json::array();
            for (const auto& n : t.nodes) {
                jt.push_back({{"f", n.feature},
                              {"t", n.threshold},
                              {"l", n.left},
                              {"r", n.right},
                              {"v", n.value}});
            }
            j["trees"].push_back(std::move(jt));
        }
        return j;
    }

    static std::unique_ptr<ForestModel> from_json(const nlohmann::json& j) {
        auto m = std::make_unique<ForestModel>();
        m->schema_ = j.at("schema").get<std::vector<std::string>>();
        m->seed = j.at("seed");
        for (const auto& jt : j.at("trees")) {
            forest::Tree t;
            for (const auto& jn : jt) {
                t.nodes.push_back(
                    {jn.at("f"), jn.at("t"), jn.at("l"), jn.at("r"), jn.at("v")});
            }
            m->trees_.push_back(std::move(t));
        }
        return m;
    }

    friend std::unique_ptr<ForestModel> forest_fit(const DataMatrix&, const ForestConfig&,
                                                   std::uint64_t);

private:
    std::vector<std::string> schema_;
    std::vector<forest::Tree> trees_;
};

// Trees may build in parallel; tree i always uses seed base+i, so the model
// is identical under any thread count.
inline std::unique_ptr<ForestModel> forest_fit(const DataMatrix& train,
                                               const ForestConfig& config, std::uint64_t seed) {
    config.validate();
    if (train.rows() == 0) throw InvalidArgument("forest_fit: empty training data");
    auto model = std::make_unique<ForestModel>();
    model->schema_ = train.columns();
    model->seed = seed;
    model->trees_.resize(config.trees);
    std::vector<std::string> failures(config.trees);
    parallel_for(config.trees, [&](std::size_t t) {
        try {
            forest::Builder builder(train, config, seed + t);
            model->trees_[t] = builder.run();
        } catch (const std::exception& e) {
            failures[t] = e.what();
        }
    });
    for (const auto& f : failures) {
        if (!f.empty()) throw TrainingError("forest tree build failed: " + f);
    }
    return model;
}

}  // namespace optlab
