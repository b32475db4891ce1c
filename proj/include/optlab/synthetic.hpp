#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "optlab/data_matrix.hpp"
#include "optlab/errors.hpp"
#include "optlab/grid.hpp"
#include "optlab/pricing.hpp"
#include "optlab/rng.hpp"
#include "optlab/threads.hpp"

// Synthetic dataset generation: theoretical pricing over sampled grid points
// plus the two distortions applied to targets (zero-mean Gaussian noise and a
// sinusoidal term in the spot).

namespace optlab {

inline const std::vector<std::string> kBaseColumns = {"S", "K", "r", "T", "sigma"};

struct BsPricerSpec {};

struct HestonPricerSpec {
    HestonParams params;
    QuadratureConfig quad;
};

using PricerSpec = std::variant<BsPricerSpec, HestonPricerSpec>;

inline std::string pricer_name(const PricerSpec& p) {
    return std::holds_alternative<BsPricerSpec>(p) ? "bs" : "heston";
}

// Prices one scenario. The Heston model ignores the sampled sigma column:
// its volatility dynamics come from the fixed parameter set.
inline double price_point(const PricingInputs& in, const PricerSpec& pricer) {
    if (std::holds_alternative<BsPricerSpec>(pricer)) return bs_call(in);
    const auto& h = std::get<HestonPricerSpec>(pricer);
    if (in.maturity == 0.0) return std::max(in.spot - in.strike, 0.0);
    return heston_call(in, h.params, h.quad);
}

inline DataMatrix price_dataset(const std::vector<PricingInputs>& points,
                                const PricerSpec& pricer) {
    DataMatrix out(kBaseColumns, points.size());
    std::vector<double> prices(points.size());
    std::vector<std::string> failures(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
        try {
            prices[i] = price_point(points[i], pricer);
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!failures[i].empty()) {
            throw NumericalError("row " + std::to_string(i) + ": " + failures[i]);
        }
        const auto& p = points[i];
        const double features[] = {p.spot, p.strike, p.rate, p.maturity, p.vol};
        out.add_row(features, prices[i]);
    }
    return out;
}

// target_i + eps_i with eps_i ~ N(0, noise_std^2) addressed by row index, so
// the result is independent of evaluation order.
inline DataMatrix distort_gaussian(const DataMatrix& data, double noise_std,
                                   std::uint64_t seed) {
    if (noise_std < 0.0) throw InvalidArgument("noise_std must be >= 0");
    DataMatrix out = data;
    if (noise_std == 0.0) return out;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        out.target(i) += noise_std * indexed_normal(seed, i);
    }
    return out;
}

// The exact draw used by distort_gaussian for one row; exposed so identity
// checks can compare against the generated noise directly.
inline double gaussian_noise_for_row(double noise_std, std::uint64_t seed, std::uint64_t row) {
    return noise_std * indexed_normal(seed, row);
}

// target_i + amplitude * sin(S_i); deterministic.
inline DataMatrix distort_sinusoidal(const DataMatrix& data, double amplitude) {
    const int s_col = data.column_index("S");
    if (s_col < 0) throw SchemaError("distort_sinusoidal requires an S column");
    DataMatrix out = data;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        out.target(i) += amplitude * std::sin(out.at(i, s_col));
    }
    return out;
}

enum class Distortion { None, Gaussian, Sinusoidal };

inline std::string to_string(Distortion d) {
    switch (d) {
        case Distortion::Gaussian: return "gaussian";
        case Distortion::Sinusoidal: return "sinusoidal";
        default: return "none";
    }
}

inline Distortion distortion_from_string(const std::string& s) {
    if (s == "gaussian") return Distortion::Gaussian;
    if (s == "sinusoidal") return Distortion::Sinusoidal;
    if (s == "none") return Distortion::None;
    throw InvalidArgument("unknown distortion: " + s);
}

// Everything needed to regenerate a dataset byte-for-byte, written as a JSON
// sidecar next to the CSV.
struct DatasetManifest {
    std::uint64_t seed = 0;
    std::string pricer = "bs";           // "bs" | "heston"
    HestonParams heston;                 // used when pricer == "heston"
    Distortion distortion = Distortion::None;
    double noise_std = 0.0975;
    double amplitude = 0.2;
    std::uint64_t rows = 0;
    std::string created_utc;             // informational; not part of regeneration
    GridSpec grid;
    std::string grid_hash;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["seed"] = seed;
        j["pricer"] = pricer;
        if (pricer == "heston") {
            j["heston"] = {{"v0", heston.v0},
                           {"kappa", heston.kappa},
                           {"theta", heston.theta},
                           {"sigma_v", heston.sigma_v},
                           {"rho", heston.rho}};
        }
        j["distortion"] = to_string(distortion);
        if (distortion == Distortion::Gaussian) j["noise_std"] = noise_std;
        if (distortion == Distortion::Sinusoidal) j["amplitude"] = amplitude;
        j["rows"] = rows;
        j["created_utc"] = created_utc;
        auto axis = [](const GridAxis& a) {
            return nlohmann::json{{"lo", a.lo}, {"step", a.step}, {"count", a.count}};
        };
        j["grid"] = {{"S", axis(grid.spot)},
                     {"K", axis(grid.strike)},
                     {"r", axis(grid.rate)},
                     {"T", axis(grid.maturity)},
                     {"sigma", axis(grid.vol)}};
        j["grid_hash"] = grid_hash.empty() ? grid.hash() : grid_hash;
        return j;
    }

    static DatasetManifest from_json(const nlohmann::json& j) {
        DatasetManifest m;
        m.seed = j.at("seed").get<std::uint64_t>();
        m.pricer = j.at("pricer").get<std::string>();
        if (j.contains("heston")) {
            const auto& h = j.at("heston");
            m.heston = {h.at("v0"), h.at("kappa"), h.at("theta"), h.at("sigma_v"), h.at("rho")};
        }
        m.distortion = distortion_from_string(j.at("distortion").get<std::string>());
        if (j.contains("noise_std")) m.noise_std = j.at("noise_std").get<double>();
        if (j.contains("amplitude")) m.amplitude = j.at("amplitude").get<double>();
        m.rows = j.at("rows").get<std::uint64_t>();
        m.created_utc = j.value("created_utc", "");
        auto axis = [](const nlohmann::json& a) {
            return GridAxis{a.at("lo"), a.at("step"), a.at("count")};
        };
        const auto& g = j.at("grid");
        m.grid = {axis(g.at("S")), axis(g.at("K")), axis(g.at("r")), axis(g.at("T")),
                  axis(g.at("sigma"))};
        m.grid_hash = j.value("grid_hash", "");
        return m;
    }
};

// Regenerates the dataset a manifest describes. Sampling, pricing and
// distortion all derive from the manifest seed.
inline DataMatrix generate_dataset(const DatasetManifest& m) {
    const auto points = sample_unique(m.grid, m.rows, derive_seed(m.seed, "sample"));
    PricerSpec pricer = BsPricerSpec{};
    if (m.pricer == "heston") {
        pricer = HestonPricerSpec{m.heston, {}};
    } else if (m.pricer != "bs") {
        throw InvalidArgument("unknown pricer: " + m.pricer);
    }
    DataMatrix data = price_dataset(points, pricer);
    switch (m.distortion) {
        case Distortion::Gaussian:
            data = distort_gaussian(data, m.noise_std, derive_seed(m.seed, "noise"));
            break;
        case Distortion::Sinusoidal:
            data = distort_sinusoidal(data, m.amplitude);
            break;
        case Distortion::None:
            break;
    }
    return data;
}

}  // namespace optlab
