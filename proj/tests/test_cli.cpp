#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "optlab/data_matrix.hpp"
#include "optlab/experiment.hpp"

using namespace optlab;
namespace fs = std::filesystem;

namespace {

const std::string kCli = OPTLAB_CLI_PATH;
const fs::path kData = OPTLAB_DATA_DIR;

struct Sandbox {
    fs::path dir;
    Sandbox() : dir(fs::temp_directory_path() / ("optlab_cli_" + std::to_string(::getpid()))) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }
};

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("generate writes a reproducible dataset and manifest") {
    Sandbox sb;
    const std::string out1 = (sb.dir / "a").string();
    const std::string out2 = (sb.dir / "b").string();
    REQUIRE(run("generate --stage 1 --n 500 --seed 42 --out " + out1) == 0);
    REQUIRE(run("generate --stage 1 --n 500 --seed 42 --out " + out2) == 0);

    const auto data = DataMatrix::read_csv(sb.dir / "a" / "dataset.csv");
    CHECK(data.rows() == 500);
    const auto manifest =
        nlohmann::json::parse(read_file(sb.dir / "a" / "dataset.manifest.json"));
    CHECK(manifest.at("seed").get<std::uint64_t>() == 42);
    CHECK(manifest.at("distortion") == "gaussian");

    CHECK(read_file(sb.dir / "a" / "dataset.csv") == read_file(sb.dir / "b" / "dataset.csv"));
}

TEST_CASE("generate stage 3 routes through the fixture files") {
    Sandbox sb;
    const std::string out = (sb.dir / "mkt").string();
    REQUIRE(run("generate --stage 3 --chain " + (kData / "aapl_chain_2025-01-02.csv").string() +
                " --curve " + (kData / "treasury_par_yields_2025-01-02.csv").string() +
                " --out " + out) == 0);
    const auto data = DataMatrix::read_csv(sb.dir / "mkt" / "dataset.csv");
    CHECK(data.rows() == 1087);
}

TEST_CASE("train produces deterministic artifacts and trial logs") {
    Sandbox sb;
    const std::string out = (sb.dir / "d").string();
    REQUIRE(run("generate --stage 1 --n 400 --seed 7 --out " + out) == 0);
    const std::string data = (sb.dir / "d" / "dataset.csv").string();

    const std::string m1 = (sb.dir / "gbm1.json").string();
    const std::string m2 = (sb.dir / "gbm2.json").string();
    REQUIRE(run("train --data " + data + " --model gbm --no-tune --seed 5 --out " + m1) == 0);
    REQUIRE(run("train --data " + data + " --model gbm --no-tune --seed 5 --out " + m2) == 0);
    CHECK(read_file(m1) == read_file(m2));

    const std::string tuned = (sb.dir / "mlp.json").string();
    REQUIRE(run("train --data " + data + " --model mlp --budget 2 --mlp-epochs 5 --seed 5 --out " +
                tuned) == 0);
    const auto log = nlohmann::json::parse(read_file(tuned + ".trials.json"));
    CHECK(log.at("trials").size() == 2);
}

TEST_CASE("evaluate reports exact self-consistency for the generating pricer") {
    Sandbox sb;
    const std::string out = (sb.dir / "clean").string();
    // distortion none comes from stage 1 with zero noise
    REQUIRE(run("generate --stage 1 --noise-std 0 --n 300 --seed 9 --out " + out) == 0);
    const std::string reports = (sb.dir / "rep").string();
    REQUIRE(run("evaluate --data " + (sb.dir / "clean" / "dataset.csv").string() +
                " --benchmarks bs --out " + reports) == 0);
    const auto rep = nlohmann::json::parse(read_file(sb.dir / "rep" / "report.json"));
    REQUIRE(rep.size() == 1);
    CHECK(rep[0].at("mse").get<double>() == 0.0);
    CHECK(rep[0].at("r2").get<double>() == 1.0);
}

TEST_CASE("evaluate emits binned tables when asked") {
    Sandbox sb;
    const std::string out = (sb.dir / "d").string();
    REQUIRE(run("generate --stage 1 --n 300 --seed 3 --out " + out) == 0);
    const std::string reports = (sb.dir / "rep").string();
    REQUIRE(run("evaluate --data " + (sb.dir / "d" / "dataset.csv").string() +
                " --benchmarks bs --bins strike,maturity,vol --out " + reports) == 0);
    CHECK(fs::exists(sb.dir / "rep" / "bins_strike_black_scholes.csv"));
    CHECK(fs::exists(sb.dir / "rep" / "bins_maturity_black_scholes.csv"));
    CHECK(fs::exists(sb.dir / "rep" / "bins_vol_black_scholes.csv"));
}

TEST_CASE("exit codes distinguish config and data errors") {
    Sandbox sb;
    CHECK(run("generate --stage 9 --out " + (sb.dir / "x").string()) == 2);
    CHECK(run("train --data " + (sb.dir / "missing.csv").string() +
              " --model gbm --no-tune --out " + (sb.dir / "m.json").string()) == 3);
    CHECK(run("nonsense-subcommand") == 2);
    CHECK(run("--help") == 0);
}

TEST_CASE("config file drives runs with flags overriding") {
    Sandbox sb;
    write_file_atomic(sb.dir / "run.toml",
                      "stage = 1\n"
                      "n = 250\n"
                      "seed = 11\n"
                      "# comment line\n"
                      "noise_std = 0.05\n"
                      "out = \"" + (sb.dir / "from_file").string() + "\"\n");
    REQUIRE(run("generate --config " + (sb.dir / "run.toml").string()) == 0);
    CHECK(DataMatrix::read_csv(sb.dir / "from_file" / "dataset.csv").rows() == 250);

    // flag wins over the file
    REQUIRE(run("generate --config " + (sb.dir / "run.toml").string() + " --n 100 --out " +
                (sb.dir / "flagged").string()) == 0);
    CHECK(DataMatrix::read_csv(sb.dir / "flagged" / "dataset.csv").rows() == 100);
}

TEST_CASE("reproduce runs are byte-identical and self-describing") {
    Sandbox sb;
    const std::string args =
        " --stage 1 --seed 7 --n 300 --budget-mlp 1 --budget-forest 1 --budget-gbm 1"
        " --mlp-epochs 5 --out ";
    const std::string r1 = (sb.dir / "r1").string();
    const std::string r2 = (sb.dir / "r2").string();
    REQUIRE(run("reproduce" + args + r1) == 0);
    REQUIRE(run("reproduce" + args + r2) == 0);

    for (const char* f : {"report.csv", "report.json", "dataset.csv", "config.json",
                          "gbm.model.json", "mlp.model.json", "forest.model.json"}) {
        CHECK(read_file(sb.dir / "r1" / f) == read_file(sb.dir / "r2" / f));
    }
    // the run directory carries the config and manifest that produced it
    CHECK(fs::exists(sb.dir / "r1" / "dataset.manifest.json"));
    const auto rep = nlohmann::json::parse(read_file(sb.dir / "r1" / "report.json"));
    CHECK(rep.size() == 5);  // bs, heston, mlp, forest, gbm
}
