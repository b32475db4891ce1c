#pragma once

#include <string>
#include <vector>

#include "optlab/pricing.hpp"
#include "optlab/regressor.hpp"

// The closed-form benchmarks behind the same predict contract as the trained
// models. Rows must carry the base (S, K, r, T, sigma) columns; extra
// engineered columns are tolerated and ignored.

namespace optlab {

namespace detail {
struct BaseCols {
    std::size_t s, k, r, t, sigma;
};

inline BaseCols base_columns(const DataMatrix& rows) {
    auto need = [&](const char* name) {
        const int i = rows.column_index(name);
        if (i < 0) throw SchemaError(std::string("benchmark pricer requires column ") + name);
        return static_cast<std::size_t>(i);
    };
    return {need("S"), need("K"), need("r"), need("T"), need("sigma")};
}
}  // namespace detail

class BsBenchmark final : public Regressor {
public:
    std::string name() const override { return "black_scholes"; }

    std::vector<double> predict(const DataMatrix& rows) const override {
        const auto c = detail::base_columns(rows);
        std::vector<double> out(rows.rows());
        for (std::size_t i = 0; i < rows.rows(); ++i) {
            out[i] = bs_call({rows.at(i, c.s), rows.at(i, c.k), rows.at(i, c.r),
                              rows.at(i, c.t), rows.at(i, c.sigma)});
        }
        return out;
    }
};

// Fixed-parameter Heston. The sigma column is not an input here: volatility
// dynamics come entirely from the parameter set.
class HestonBenchmark final : public Regressor {
public:
    explicit HestonBenchmark(HestonParams params = {}, QuadratureConfig quad = {})
        : params_(params), quad_(quad) {}

    std::string name() const override { return "heston"; }

    std::vector<double> predict(const DataMatrix& rows) const override {
        const auto c = detail::base_columns(rows);
        std::vector<double> out(rows.rows());
        for (std::size_t i = 0; i < rows.rows(); ++i) {
            const PricingInputs in{rows.at(i, c.s), rows.at(i, c.k), rows.at(i, c.r),
                                   rows.at(i, c.t), 0.0};
            out[i] = in.maturity == 0.0 ? std::max(in.spot - in.strike, 0.0)
                                        : heston_call(in, params_, quad_);
        }
        return out;
    }

    const HestonParams& params() const { return params_; }

private:
    HestonParams params_;
    QuadratureConfig quad_;
};

}  // namespace optlab
