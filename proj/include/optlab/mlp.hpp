#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "optlab/features.hpp"
#include "optlab/regressor.hpp"
#include "optlab/rng.hpp"

// Feedforward regressor: ReLU hidden layers, linear output, squared-error
// loss with L2 weight penalty, trained by mini-batch Adam.

namespace optlab {
namespace mlp {

struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;  // out
};

// The bare network. Training-time conditioning (input/output scaling) lives
// in MlpModel; everything here operates on raw arrays so gradients can be
// checked in isolation.
struct Network {
    std::vector<Layer> layers;  // hidden layers then the linear output layer

    static Network build(int inputs, const std::vector<int>& hidden, Rng& rng) {
        Network net;
        int prev = inputs;
        std::vector<int> sizes = hidden;
        sizes.push_back(1);
        for (int width : sizes) {
            Layer layer;
            layer.in = prev;
            layer.out = width;
            layer.w.resize(static_cast<std::size_t>(width) * prev);
            layer.b.assign(width, 0.0);
            // He-uniform fan-in limit for the ReLU stack
            const double limit = std::sqrt(6.0 / prev);
            for (auto& v : layer.w) v = rng.uniform(-limit, limit);
            net.layers.push_back(std::move(layer));
            prev = width;
        }
        return net;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.w.size() + l.b.size();
        return n;
    }

    double forward_one(std::span<const double> x, std::vector<std::vector<double>>* acts = nullptr) const {
        std::vector<double> cur(x.begin(), x.end());
        if (acts) {
            acts->clear();
            acts->push_back(cur);
        }
        for (std::size_t li = 0; li < layers.size(); ++li) {
            const auto& l = layers[li];
            std::vector<double> next(l.out);
            for (int o = 0; o < l.out; ++o) {
                const double* wr = l.w.data() + static_cast<std::size_t>(o) * l.in;
                double acc = l.b[o];
                for (int i = 0; i < l.in; ++i) acc += wr[i] * cur[i];
                next[o] = (li + 1 < layers.size() && acc < 0.0) ? 0.0 : acc;  // ReLU on hidden
            }
            cur = std::move(next);
            if (acts) acts->push_back(cur);
        }
        return cur[0];
    }

    // Mean squared error over the batch plus l2 * sum(w^2), with gradients
    // accumulated into `grads` (same shapes as layers).
    double loss_and_grad(const std::vector<std::span<const double>>& xs,
                         std::span<const double> ys, double l2,
                         std::vector<Layer>& grads) const {
        grads.resize(layers.size());
        for (std::size_t li = 0; li < layers.size(); ++li) {
            grads[li].in = layers[li].in;
            grads[li].out = layers[li].out;
            grads[li].w.assign(layers[li].w.size(), 0.0);
            grads[li].b.assign(layers[li].b.size(), 0.0);
        }
        const double n = static_cast<double>(xs.size());
        double loss = 0.0;
        std::vector<std::vector<double>> acts;
        for (std::size_t s = 0; s < xs.size(); ++s) {
            const double pred = forward_one(xs[s], &acts);
            const double resid = pred - ys[s];
            loss += resid * resid;
            // backward: delta at the linear output
            std::vector<double> delta{2.0 * resid / n};
            for (std::size_t li = layers.size(); li-- > 0;) {
                const auto& l = layers[li];
                auto& g = grads[li];
                const auto& input = acts[li];
                for (int o = 0; o < l.out; ++o) {
                    const double d = delta[o];
                    if (d == 0.0) continue;
                    g.b[o] += d;
                    double* gw = g.w.data() + static_cast<std::size_t>(o) * l.in;
                    for (int i = 0; i < l.in; ++i) gw[i] += d * input[i];
                }
                if (li == 0) break;
                std::vector<double> prev_delta(l.in, 0.0);
                for (int o = 0; o < l.out; ++o) {
                    const double d = delta[o];
                    if (d == 0.0) continue;
                    const double* wr = l.w.data() + static_cast<std::size_t>(o) * l.in;
                    for (int i = 0; i < l.in; ++i) prev_delta[i] += d * wr[i];
                }
                // ReLU gate: activation zero means the unit was clamped
                for (int i = 0; i < l.in; ++i) {
                    if (acts[li][i] <= 0.0) prev_delta[i] = 0.0;
                }
                delta = std::move(prev_delta);
            }
        }
        loss /= n;
        for (std::size_t li = 0; li < layers.size(); ++li) {
            const auto& l = layers[li];
            auto& g = grads[li];
            double wsq = 0.0;
            for (std::size_t k = 0; k < l.w.size(); ++k) {
                wsq += l.w[k] * l.w[k];
                g.w[k] += 2.0 * l2 * l.w[k];
            }
            loss += l2 * wsq;
        }
        return loss;
    }
};

struct AdamState {
    std::vector<std::vector<double>> m, v;
    long t = 0;

    void init(const Network& net) {
        m.clear();
        v.clear();
        for (const auto& l : net.layers) {
            m.push_back(std::vector<double>(l.w.size() + l.b.size(), 0.0));
            v.push_back(std::vector<double>(l.w.size() + l.b.size(), 0.0));
        }
        t = 0;
    }

    void step(Network& net, const std::vector<Layer>& grads, double lr) {
        constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, t);
        const double bc2 = 1.0 - std::pow(beta2, t);
        for (std::size_t li = 0; li < net.layers.size(); ++li) {
            auto& l = net.layers[li];
            auto update = [&](double& param, double grad, std::size_t k) {
                m[li][k] = beta1 * m[li][k] + (1.0 - beta1) * grad;
                v[li][k] = beta2 * v[li][k] + (1.0 - beta2) * grad * grad;
                param -= lr * (m[li][k] / bc1) / (std::sqrt(v[li][k] / bc2) + eps);
            };
            for (std::size_t k = 0; k < l.w.size(); ++k) update(l.w[k], grads[li].w[k], k);
            for (std::size_t k = 0; k < l.b.size(); ++k) {
                update(l.b[k], grads[li].b[k], l.w.size() + k);
            }
        }
    }
};

}  // namespace mlp

class MlpModel final : public TrainedRegressor {
public:
    std::string name() const override { return "mlp"; }

    std::vector<double> predict(const DataMatrix& rows) const override {
        check_schema(schema_, rows);
        std::vector<double> out(rows.rows());
        std::vector<double> scaled(schema_.size());
        for (std::size_t r = 0; r < rows.rows(); ++r) {
            const auto row = rows.row(r);
            for (std::size_t j = 0; j < scaled.size(); ++j) {
                scaled[j] = (row[j] - input_scale_.mean[j]) / input_scale_.stddev[j];
            }
            out[r] = net_.forward_one(scaled) * target_std_ + target_mean_;
        }
        return out;
    }

    nlohmann::json to_json() const override {
        nlohmann::json j;
        j["format"] = "optlab-model";
        j["version"] = 1;
        j["kind"] = "mlp";
        j["schema"] = schema_;
        j["seed"] = seed;
        j["epochs_run"] = epochs_run;
        j["final_train_loss"] = final_train_loss;
        j["input_mean"] = input_scale_.mean;
        j["input_std"] = input_scale_.stddev;
        j["target_mean"] = target_mean_;
        j["target_std"] = target_std_;
        j["layers"] = nlohmann::json::array();
        for (const auto& l : net_.layers) {
            j["layers"].push_back({{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}});
        }
        return j;
    }

    static std::unique_ptr<MlpModel> from_json(const nlohmann::json& j) {
        auto m = std::make_unique<MlpModel>();
        m->schema_ = j.at("schema").get<std::vector<std::string>>();
        m->seed = j.at("seed");
        m->epochs_run = j.at("epochs_run");
        m->final_train_loss = j.at("final_train_loss");
        m->input_scale_.mean = j.at("input_mean").get<std::vector<double>>();
        m->input_scale_.stddev = j.at("input_std").get<std::vector<double>>();
        m->target_mean_ = j.at("target_mean");
        m->target_std_ = j.at("target_std");
        for (const auto& jl : j.at("layers")) {
            mlp::Layer l;
            l.in = jl.at("in");
            l.out = jl.at("out");
            l.w = jl.at("w").get<std::vector<double>>();
            l.b = jl.at("b").get<std::vector<double>>();
            m->net_.layers.push_back(std::move(l));
        }
        return m;
    }

    int epochs_run = 0;
    double final_train_loss = 0.0;

    friend std::unique_ptr<MlpModel> mlp_fit(const DataMatrix&, const MlpConfig&, std::uint64_t);

private:
    std::vector<std::string> schema_;
    mlp::Network net_;
    Standardizer input_scale_;
    double target_mean_ = 0.0;
    double target_std_ = 1.0;
};

// Trains the network with mini-batch Adam on squared error. Features and
// target are z-scored internally (the transform is part of the model, fitted
// on the training rows only) so the optimizer sees unit-scale data whatever
// the dataset units are; predictions are mapped back to raw scale.
inline std::unique_ptr<MlpModel> mlp_fit(const DataMatrix& train, const MlpConfig& config,
                                         std::uint64_t seed) {
    config.validate();
    if (train.rows() == 0) throw InvalidArgument("mlp_fit: empty training data");
    auto model = std::make_unique<MlpModel>();
    model->schema_ = train.columns();
    model->seed = seed;

    model->input_scale_ = train.rows() >= 2
                              ? standardize_fit(train)
                              : Standardizer{std::vector<double>(train.cols(), 0.0),
                                             std::vector<double>(train.cols(), 1.0),
                                             std::vector<bool>(train.cols(), false)};
    const DataMatrix scaled = standardize_apply(train, model->input_scale_);

    const std::size_t n = train.rows();
    double tm = 0.0;
    for (std::size_t i = 0; i < n; ++i) tm += train.target(i);
    tm /= static_cast<double>(n);
    double tv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = train.target(i) - tm;
        tv += d * d;
    }
    model->target_mean_ = tm;
    model->target_std_ = std::max(std::sqrt(tv / static_cast<double>(n)), 1e-12);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = (train.target(i) - tm) / model->target_std_;
    }

    Rng rng(seed);
    model->net_ = mlp::Network::build(static_cast<int>(train.cols()), config.hidden, rng);
    mlp::AdamState adam;
    adam.init(model->net_);

    // optional early-stop slice: last 10% of a seeded permutation
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::size_t n_fit = n;
    std::vector<std::size_t> val_idx;
    if (config.early_stopping && n >= 20) {
        rng.shuffle(order);
        const std::size_t n_val = n / 10;
        n_fit = n - n_val;
        val_idx.assign(order.begin() + n_fit, order.end());
        order.resize(n_fit);
    }

    auto eval_scaled_mse = [&](const std::vector<std::size_t>& idx) {
        double acc = 0.0;
        for (std::size_t i : idx) {
            const double d = model->net_.forward_one(scaled.row(i)) - y[i];
            acc += d * d;
        }
        return acc / static_cast<double>(idx.size());
    };

    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    std::vector<mlp::Layer> grads;
    std::vector<std::span<const double>> batch_x;
    std::vector<double> batch_y;
    int epoch = 0;
    for (; epoch < config.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n_fit; start += config.batch_size) {
            const std::size_t stop = std::min(n_fit, start + config.batch_size);
            batch_x.clear();
            batch_y.clear();
            for (std::size_t k = start; k < stop; ++k) {
                batch_x.push_back(scaled.row(order[k]));
                batch_y.push_back(y[order[k]]);
            }
            const double loss = model->net_.loss_and_grad(batch_x, batch_y, config.l2, grads);
            if (!std::isfinite(loss)) {
                throw TrainingError("MLP training diverged at epoch " + std::to_string(epoch) +
                                    " with learning rate " + std::to_string(config.learning_rate));
            }
            adam.step(model->net_, grads, config.learning_rate);
        }
        if (config.early_stopping && !val_idx.empty()) {
            const double val = eval_scaled_mse(val_idx);
            if (val < best_val - 1e-12) {
                best_val = val;
                since_best = 0;
            } else if (++since_best >= config.patience) {
                ++epoch;
                break;
            }
        }
    }
    model->epochs_run = epoch;

    double final_mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred =
            model->net_.forward_one(scaled.row(i)) * model->target_std_ + model->target_mean_;
        const double d = pred - train.target(i);
        final_mse += d * d;
    }
    model->final_train_loss = final_mse / static_cast<double>(n);
    return model;
}

}  // namespace optlab
