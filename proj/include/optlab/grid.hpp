#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optlab/errors.hpp"
#include "optlab/io.hpp"
#include "optlab/pricing.hpp"
#include "optlab/rng.hpp"

namespace optlab {

// One discretized variable: values are lo + i*step for i in [0, count), so a
// grid point is identified by integer indices and never by float equality.
struct GridAxis {
    double lo = 0.0;
    double step = 1.0;
    int count = 1;

    double value(int i) const { return lo + static_cast<double>(i) * step; }

    void validate(const char* name) const {
        if (count < 1) throw InvalidArgument(std::string(name) + " axis is empty");
        if (!(step > 0.0)) throw InvalidArgument(std::string(name) + " axis step must be > 0");
    }
};

// Discretization of (S, K, r, T, sigma). The default spans S in [50, 60] and
// K in [20, 90] in unit steps, r in (0, 0.05] in steps of 0.01, T from 0.25
// to 2.0 years in monthly (1/12) increments and sigma in [0.1, 0.8] in steps
// of 0.1.
struct GridSpec {
    GridAxis spot{50.0, 1.0, 11};
    GridAxis strike{20.0, 1.0, 71};
    GridAxis rate{0.01, 0.01, 5};
    GridAxis maturity{0.25, 1.0 / 12.0, 22};
    GridAxis vol{0.1, 0.1, 8};

    void validate() const {
        spot.validate("spot");
        strike.validate("strike");
        rate.validate("rate");
        maturity.validate("maturity");
        vol.validate("vol");
    }

    std::uint64_t cardinality() const {
        return static_cast<std::uint64_t>(spot.count) * strike.count * rate.count *
               maturity.count * vol.count;
    }

    // Decodes a flat index into a grid point; lexicographic in
    // (S, K, r, T, sigma) with sigma varying fastest.
    PricingInputs point(std::uint64_t index) const {
        const auto vi = static_cast<int>(index % vol.count);
        index /= vol.count;
        const auto ti = static_cast<int>(index % maturity.count);
        index /= maturity.count;
        const auto ri = static_cast<int>(index % rate.count);
        index /= rate.count;
        const auto ki = static_cast<int>(index % strike.count);
        index /= strike.count;
        const auto si = static_cast<int>(index);
        return {spot.value(si), strike.value(ki), rate.value(ri), maturity.value(ti),
                vol.value(vi)};
    }

    std::string hash() const {
        std::string blob;
        for (const GridAxis* a : {&spot, &strike, &rate, &maturity, &vol}) {
            blob += format_double(a->lo) + "," + format_double(a->step) + "," +
                    std::to_string(a->count) + ";";
        }
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(blob)));
        return buf;
    }
};

// Lazy forward iteration over every grid point in index order.
class GridRange {
public:
    explicit GridRange(GridSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

    class iterator {
    public:
        iterator(const GridSpec* spec, std::uint64_t i) : spec_(spec), i_(i) {}
        PricingInputs operator*() const { return spec_->point(i_); }
        iterator& operator++() {
            ++i_;
            return *this;
        }
        bool operator!=(const iterator& o) const { return i_ != o.i_; }

    private:
        const GridSpec* spec_;
        std::uint64_t i_;
    };

    iterator begin() const { return {&spec_, 0}; }
    iterator end() const { return {&spec_, spec_.cardinality()}; }
    std::uint64_t size() const { return spec_.cardinality(); }

private:
    GridSpec spec_;
};

inline GridRange enumerate_grid(const GridSpec& spec) { return GridRange(spec); }

// n distinct grid points, uniformly without replacement, by partial
// Fisher-Yates over the flat index set. Same seed, same sample, same order.
inline std::vector<PricingInputs> sample_unique(const GridSpec& spec, std::uint64_t n,
                                                std::uint64_t seed) {
    spec.validate();
    const std::uint64_t total = spec.cardinality();
    if (n > total) {
        throw InvalidArgument("requested " + std::to_string(n) + " unique grid points but the grid has only " +
                              std::to_string(total));
    }
    std::vector<std::uint64_t> indices(total);
    for (std::uint64_t i = 0; i < total; ++i) indices[i] = i;
    Rng rng(seed);
    std::vector<PricingInputs> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t j = i + rng.below(total - i);
        std::swap(indices[i], indices[j]);
        out.push_back(spec.point(indices[i]));
    }
    return out;
}

}  // namespace optlab
