#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "optlab/data_matrix.hpp"
#include "optlab/errors.hpp"
#include "optlab/rng.hpp"

// Feature engineering, train/test splitting and z-score standardization
// shared by all learners.

namespace optlab {

// Engineered columns are pure functions of the base (S, K, r, T, sigma)
// columns. All default off: the headline comparisons run every model on the
// same raw inputs.
struct FeatureSpec {
    bool moneyness = false;       // S/K
    bool log_moneyness = false;   // ln(S/K)
    bool spot_vol = false;        // S*sigma
    bool strike_rate = false;     // K*r

    bool any() const { return moneyness || log_moneyness || spot_vol || strike_rate; }
};

inline DataMatrix engineer_features(const DataMatrix& data, const FeatureSpec& spec) {
    DataMatrix out = data;
    if (!spec.any()) return out;
    auto col = [&](const char* name) {
        const int i = data.column_index(name);
        if (i < 0) throw SchemaError(std::string("engineer_features requires column ") + name);
        return static_cast<std::size_t>(i);
    };
    const std::size_t n = data.rows();
    if (spec.moneyness || spec.log_moneyness) {
        const std::size_t s = col("S"), k = col("K");
        if (spec.moneyness) {
            std::vector<double> v(n);
            for (std::size_t r = 0; r < n; ++r) v[r] = data.at(r, s) / data.at(r, k);
            out.add_column("moneyness", v);
        }
        if (spec.log_moneyness) {
            std::vector<double> v(n);
            for (std::size_t r = 0; r < n; ++r) {
                const double ratio = data.at(r, s) / data.at(r, k);
                if (!(ratio > 0.0)) {
                    throw InvalidArgument("row " + std::to_string(r) +
                                          ": log-moneyness needs S/K > 0, got " +
                                          std::to_string(ratio));
                }
                v[r] = std::log(ratio);
            }
            out.add_column("log_moneyness", v);
        }
    }
    if (spec.spot_vol) {
        const std::size_t s = col("S"), g = col("sigma");
        std::vector<double> v(n);
        for (std::size_t r = 0; r < n; ++r) v[r] = data.at(r, s) * data.at(r, g);
        out.add_column("S_sigma", v);
    }
    if (spec.strike_rate) {
        const std::size_t k = col("K"), rr = col("r");
        std::vector<double> v(n);
        for (std::size_t r = 0; r < n; ++r) v[r] = data.at(r, k) * data.at(r, rr);
        out.add_column("K_r", v);
    }
    return out;
}

struct SplitResult {
    DataMatrix train;
    DataMatrix test;
    std::uint64_t seed = 0;
    double fraction = 0.2;
};

// The index partition depends only on (n, fraction, seed): a seeded
// permutation of [0, n) whose first round(fraction*n) positions form the test
// set. Rows keep their original relative order inside each part.
inline void split_indices(std::size_t n, double fraction, std::uint64_t seed,
                          std::vector<std::size_t>& train_idx,
                          std::vector<std::size_t>& test_idx) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw InvalidArgument("split fraction must be in (0, 1)");
    }
    if (n < 2) throw InvalidArgument("need at least 2 rows to split");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    rng.shuffle(perm);
    const auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<bool> is_test(n, false);
    for (std::size_t i = 0; i < n_test; ++i) is_test[perm[i]] = true;
    train_idx.clear();
    test_idx.clear();
    for (std::size_t i = 0; i < n; ++i) {
        (is_test[i] ? test_idx : train_idx).push_back(i);
    }
}

inline SplitResult train_test_split(const DataMatrix& data, double fraction,
                                    std::uint64_t seed) {
    std::vector<std::size_t> train_idx, test_idx;
    split_indices(data.rows(), fraction, seed, train_idx, test_idx);
    return {data.select_rows(train_idx), data.select_rows(test_idx), seed, fraction};
}

// Per-column (mean, population std) transform, fit on training data only.
// Constant columns get their std floored at 1e-12 and a warning flag.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<bool> floored;

    bool any_floored() const {
        for (bool f : floored) {
            if (f) return true;
        }
        return false;
    }
};

inline Standardizer standardize_fit(const DataMatrix& data) {
    if (data.rows() < 2) throw InvalidArgument("standardize_fit needs at least 2 rows");
    const std::size_t n = data.rows(), c = data.cols();
    Standardizer s;
    s.mean.assign(c, 0.0);
    s.stddev.assign(c, 0.0);
    s.floored.assign(c, false);
    for (std::size_t j = 0; j < c; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += data.at(i, j);
        s.mean[j] = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = data.at(i, j) - s.mean[j];
            ss += d * d;
        }
        s.stddev[j] = std::sqrt(ss / static_cast<double>(n));
        if (s.stddev[j] < 1e-12) {
            s.stddev[j] = 1e-12;
            s.floored[j] = true;
        }
    }
    return s;
}

inline DataMatrix standardize_apply(const DataMatrix& data, const Standardizer& s) {
    if (s.mean.size() != data.cols()) throw SchemaError("standardizer column count mismatch");
    DataMatrix out = data;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) {
            out.at(i, j) = (out.at(i, j) - s.mean[j]) / s.stddev[j];
        }
    }
    return out;
}

}  // namespace optlab
