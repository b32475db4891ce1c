#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "optlab/forest.hpp"
#include "optlab/synthetic.hpp"

using namespace optlab;
using Catch::Approx;

namespace {
DataMatrix random_rows(std::size_t n, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
    DataMatrix d(names);
    std::vector<double> f(cols);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : f) v = rng.uniform(0, 10);
        d.add_row(f, rng.uniform(-5, 5));
    }
    return d;
}
}  // namespace

TEST_CASE("depth-0 single tree predicts the bootstrap-sample mean") {
    const auto data = random_rows(64, 2, 7);
    ForestConfig cfg;
    cfg.trees = 1;
    cfg.max_depth = 0;
    const std::uint64_t seed = 123;
    const auto model = forest_fit(data, cfg, seed);

    // reconstruct the bootstrap draw: tree 0 uses seed base+0
    Rng rng(seed + 0);
    double mean = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) mean += data.target(rng.below(data.rows()));
    mean /= static_cast<double>(data.rows());

    const auto preds = model->predict(data);
    for (double p : preds) CHECK(p == Approx(mean).margin(1e-12));
}

TEST_CASE("pure dataset predicts the common target exactly") {
    DataMatrix d(std::vector<std::string>{"a", "b"});
    const double f[] = {1.5, 2.5};
    for (int i = 0; i < 10; ++i) d.add_row(f, 4.25);
    ForestConfig cfg;
    cfg.trees = 5;
    const auto model = forest_fit(d, cfg, 3);
    for (double p : model->predict(d)) CHECK(p == 4.25);
}

TEST_CASE("unbounded exact tree interpolates unique rows") {
    const auto data = random_rows(20, 3, 99);
    ForestConfig cfg;
    cfg.trees = 1;
    cfg.max_depth = -1;
    cfg.bootstrap = false;
    cfg.features_per_split = 1.0;
    const auto model = forest_fit(data, cfg, 1);
    const auto preds = model->predict(data);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        CHECK(preds[i] == Approx(data.target(i)).margin(1e-12));
    }
}

TEST_CASE("prediction equals the mean of per-tree predictions") {
    const auto data = random_rows(200, 4, 5);
    ForestConfig cfg;
    cfg.trees = 7;
    cfg.max_depth = 6;
    cfg.features_per_split = 0.6;
    const auto model = forest_fit(data, cfg, 77);
    const auto preds = model->predict(data);
    for (std::size_t r = 0; r < 20; ++r) {
        double acc = 0.0;
        for (std::size_t t = 0; t < model->tree_count(); ++t) {
            acc += model->tree_predict(t, data.row(r));
        }
        CHECK(preds[r] == Approx(acc / 7.0).margin(1e-12));
    }
}

TEST_CASE("forest quality improves on a learnable signal") {
    // y = f0 + 2*f1; a modest forest should track it closely
    Rng rng(31);
    DataMatrix d(std::vector<std::string>{"f0", "f1"});
    for (int i = 0; i < 800; ++i) {
        const double f[] = {rng.uniform(0, 1), rng.uniform(0, 1)};
        d.add_row(f, f[0] + 2 * f[1]);
    }
    ForestConfig cfg;
    cfg.trees = 50;
    cfg.max_depth = 10;
    const auto model = forest_fit(d, cfg, 8);
    const auto preds = model->predict(d);
    double err = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        err += (preds[i] - d.target(i)) * (preds[i] - d.target(i));
    }
    CHECK(err / d.rows() < 0.01);
}

TEST_CASE("empty training data is rejected") {
    DataMatrix empty(std::vector<std::string>{"x"});
    CHECK_THROWS_AS(forest_fit(empty, ForestConfig{}, 1), InvalidArgument);
}

TEST_CASE("fits are reproducible and serialize losslessly") {
    const auto data = random_rows(100, 3, 15);
    ForestConfig cfg;
    cfg.trees = 4;
    cfg.max_depth = 5;
    cfg.features_per_split = 0.7;
    const auto a = forest_fit(data, cfg, 21);
    const auto b = forest_fit(data, cfg, 21);
    CHECK(a->to_json().dump() == b->to_json().dump());

    const auto loaded = ForestModel::from_json(a->to_json());
    const auto pa = a->predict(data);
    const auto pl = loaded->predict(data);
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == pl[i]);
}

TEST_CASE("config validation") {
    ForestConfig bad;
    bad.trees = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = {};
    bad.features_per_split = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = {};
    bad.min_samples_leaf = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
