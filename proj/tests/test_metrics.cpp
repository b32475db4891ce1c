#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "optlab/benchmarks.hpp"
#include "optlab/metrics.hpp"
#include "optlab/synthetic.hpp"

using namespace optlab;
using Catch::Approx;

TEST_CASE("mse / mae / r2 basics") {
    const std::vector<double> a{1, 2, 3};
    CHECK(mse(a, a) == 0.0);
    CHECK(mae(a, a) == 0.0);
    CHECK(r2(a, a) == 1.0);

    const std::vector<double> mean_pred{2, 2, 2};
    CHECK(mse(a, mean_pred) == Approx(2.0 / 3.0).margin(1e-15));
    CHECK(r2(a, mean_pred) == Approx(0.0).margin(1e-15));

    const std::vector<double> zeros{0, 0, 0, 0};
    const std::vector<double> ones{1, 1, 1, 1};
    CHECK(mse(zeros, ones) == 1.0);
    CHECK(mae(zeros, ones) == 1.0);
    CHECK_THROWS_AS(r2(zeros, ones), UndefinedResult);

    const std::vector<double> shorter{1, 2};
    CHECK_THROWS_AS(mse(a, shorter), InvalidArgument);
    CHECK_THROWS_AS(mae(std::vector<double>{}, std::vector<double>{}), InvalidArgument);
    const std::vector<double> with_nan{1, std::nan(""), 3};
    CHECK_THROWS_AS(mse(a, with_nan), InvalidArgument);
}

namespace {
DataMatrix rows_with(const std::vector<double>& strike_col, const std::vector<double>& targets) {
    DataMatrix d(std::vector<std::string>{"K"});
    for (std::size_t i = 0; i < strike_col.size(); ++i) {
        const double f[] = {strike_col[i]};
        d.add_row(f, targets[i]);
    }
    return d;
}
}  // namespace

TEST_CASE("binned_mae partition identities") {
    const auto d = rows_with({10, 20, 30, 40}, {1, 1, 1, 1});
    const std::vector<double> preds{0, 0, 0, 0};  // every residual 1

    // one bin covering everything reproduces the global MAE
    const std::vector<double> one_bin{0.0, 100.0};
    const auto t1 = binned_mae(d, preds, "K", one_bin);
    REQUIRE(t1.counts.size() == 1);
    CHECK(t1.counts[0] == 4);
    CHECK(t1.bin_mae[0] == mae(d.targets(), preds));
    CHECK(t1.overflow == 0);

    // two bins with residuals {1} and {3}
    const auto d2 = rows_with({10, 30}, {1, 3});
    const std::vector<double> zero2{0, 0};
    const auto t2 = binned_mae(d2, zero2, "K", std::vector<double>{0.0, 20.0, 40.0});
    CHECK(t2.bin_mae[0] == 1.0);
    CHECK(t2.bin_mae[1] == 3.0);

    // weighted recombination equals the global MAE when nothing overflows
    const auto d3 = rows_with({5, 15, 25, 35, 45}, {1, 2, 3, 4, 10});
    const std::vector<double> zero5{0, 0, 0, 0, 0};
    const auto t3 = binned_mae(d3, zero5, "K", std::vector<double>{0.0, 20.0, 50.0});
    double weighted = 0.0;
    std::size_t total = 0;
    for (std::size_t b = 0; b < t3.counts.size(); ++b) {
        weighted += static_cast<double>(t3.counts[b]) * t3.bin_mae[b];
        total += t3.counts[b];
    }
    CHECK(weighted / static_cast<double>(total) == Approx(mae(d3.targets(), zero5)).margin(1e-12));
}

TEST_CASE("binned_mae edge semantics") {
    const auto d = rows_with({10, 20, 30}, {1, 1, 1});
    const std::vector<double> preds{0, 0, 0};
    // last bin is closed: the max value lands in the final bin
    const auto t = binned_mae(d, preds, "K", std::vector<double>{10.0, 20.0, 30.0});
    CHECK(t.counts[0] == 1);
    CHECK(t.counts[1] == 2);
    // outside values go to the overflow bucket
    const auto t2 = binned_mae(d, preds, "K", std::vector<double>{15.0, 35.0});
    CHECK(t2.counts[0] == 2);
    CHECK(t2.overflow == 1);
    // empty bin: count 0, MAE reported absent
    const auto t3 = binned_mae(d, preds, "K", std::vector<double>{0.0, 5.0, 35.0});
    CHECK(t3.counts[0] == 0);
    CHECK(std::isnan(t3.bin_mae[0]));

    CHECK_THROWS_AS(binned_mae(d, preds, "K", std::vector<double>{1.0}), InvalidArgument);
    CHECK_THROWS_AS(binned_mae(d, preds, "K", std::vector<double>{2.0, 2.0}), InvalidArgument);
    CHECK_THROWS_AS(binned_mae(d, preds, "nope", std::vector<double>{0.0, 1.0}), SchemaError);
}

TEST_CASE("benchmark_predict validates repetitions and reports a median") {
    int calls = 0;
    auto pass = [&] { ++calls; };
    CHECK_THROWS_AS(benchmark_predict(pass, 2), InvalidArgument);
    calls = 0;
    const double med = benchmark_predict(pass, 3);
    CHECK(calls == 3);
    CHECK(med >= 0.0);
}

TEST_CASE("row-parallel prediction matches the serial pass exactly") {
    const auto data = price_dataset(sample_unique(GridSpec{}, 777, 2), BsPricerSpec{});
    BsBenchmark bs;
    const auto serial = bs.predict(data);
    const auto parallel = predict_parallel(bs, data);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i] == parallel[i]);
}

TEST_CASE("formula pricer timing grows with row count") {
    const auto small = price_dataset(sample_unique(GridSpec{}, 20000, 3), BsPricerSpec{});
    const auto big = price_dataset(sample_unique(GridSpec{}, 40000, 3), BsPricerSpec{});
    BsBenchmark bs;
    const double t_small = benchmark_predict([&] { bs.predict(small); }, 7);
    const double t_big = benchmark_predict([&] { bs.predict(big); }, 7);
    CHECK(t_big >= 1.5 * t_small);
}

TEST_CASE("report emission and round trip") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "optlab_report_test";
    fs::remove_all(dir);

    MetricsReport r1;
    r1.model = "gbm";
    r1.dataset = "stage1";
    r1.rows = 10;
    r1.mse = 0.04;
    r1.mae = 0.1;
    r1.r2 = 0.99;
    MetricsReport r2 = r1;
    r2.model = "mlp";
    r2.timing = Timing{std::nullopt, 0.5, 10};
    r2.bins.push_back(BinnedMae{"K", {0.0, 1.0, 2.0}, {3, 7}, {0.1, 0.2}, 0});

    emit_report({r1, r2}, dir);
    const auto csv = read_file(dir / "report.csv");
    CHECK(csv.rfind("model,dataset,rows,mse,mae,r2,fit_seconds,predict_seconds\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows
    CHECK(csv.find("gbm,stage1") != std::string::npos);
    CHECK(csv.find("mlp,stage1") != std::string::npos);
    CHECK(fs::exists(dir / "bins_K_mlp.csv"));

    const auto parsed = nlohmann::json::parse(read_file(dir / "report.json"));
    REQUIRE(parsed.size() == 2);
    const auto back = report_from_json(parsed[1]);
    CHECK(back.model == r2.model);
    CHECK(back.mse == r2.mse);
    REQUIRE(back.bins.size() == 1);
    CHECK(back.bins[0].edges == r2.bins[0].edges);
    CHECK(back.bins[0].counts == r2.bins[0].counts);
    CHECK_FALSE(back.timing->fit_seconds.has_value());
    CHECK(back.timing->predict_seconds == 0.5);
    fs::remove_all(dir);
}

TEST_CASE("reports enforce MAE <= RMSE on emission") {
    MetricsReport bad;
    bad.model = "x";
    bad.dataset = "y";
    bad.rows = 1;
    bad.mse = 0.01;   // RMSE 0.1
    bad.mae = 0.5;    // impossible
    bad.r2 = 0.5;
    CHECK_THROWS_AS(report_to_json(bad), NumericalError);
}

TEST_CASE("emit_report fails loudly on unwritable paths") {
    MetricsReport r;
    r.model = "x";
    r.dataset = "y";
    r.rows = 1;
    r.mse = 0.01;
    r.mae = 0.05;
    r.r2 = 0.5;
    CHECK_THROWS_AS(emit_report({r}, "/dev/null/unwritable"), IoError);
}
