#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>

#include "optlab/grid.hpp"

using namespace optlab;
using Catch::Approx;

TEST_CASE("default grid axes match the declared ranges") {
    GridSpec spec;
    // r axis: (0.00, 0.05] in steps of 0.01 -> {0.01, ..., 0.05}
    REQUIRE(spec.rate.count == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(spec.rate.value(i) == Approx(0.01 * (i + 1)).margin(1e-15));
    }
    // T axis: 0.25 to 2.0 in monthly steps -> (2.0 - 0.25) * 12 + 1 = 22 values
    REQUIRE(spec.maturity.count == 22);
    CHECK(spec.maturity.value(0) == 0.25);
    CHECK(spec.maturity.value(21) == Approx(2.0).margin(1e-12));
    CHECK(spec.vol.count == 8);
    CHECK(spec.spot.count == 11);
    CHECK(spec.strike.count == 71);
    CHECK(spec.cardinality() == 11ull * 71 * 5 * 22 * 8);
}

TEST_CASE("grid coordinates are exact index multiples") {
    GridSpec spec;
    // identical index always reproduces identical bits
    for (std::uint64_t idx :
         {std::uint64_t{0}, std::uint64_t{123}, std::uint64_t{9999}, spec.cardinality() - 1}) {
        const auto a = spec.point(idx);
        const auto b = spec.point(idx);
        CHECK(a.spot == b.spot);
        CHECK(a.maturity == b.maturity);
        CHECK(a.vol == spec.vol.lo + std::round((a.vol - spec.vol.lo) / spec.vol.step) * spec.vol.step);
    }
}

TEST_CASE("enumerate_grid yields every point once in lexicographic order") {
    GridSpec small;
    small.spot = {50.0, 1.0, 2};
    small.strike = {20.0, 5.0, 3};
    small.rate = {0.01, 0.01, 2};
    small.maturity = {0.25, 0.25, 2};
    small.vol = {0.1, 0.1, 2};
    REQUIRE(small.cardinality() == 48);

    std::set<std::string> seen;
    std::uint64_t count = 0;
    PricingInputs prev{};
    for (const auto& p : enumerate_grid(small)) {
        // strictly increasing tuple in (S, K, r, T, sigma) order
        if (count > 0) {
            const auto tup = std::tuple{p.spot, p.strike, p.rate, p.maturity, p.vol};
            const auto prev_tup =
                std::tuple{prev.spot, prev.strike, prev.rate, prev.maturity, prev.vol};
            CHECK(tup > prev_tup);
        }
        seen.insert(format_double(p.spot) + "," + format_double(p.strike) + "," +
                    format_double(p.rate) + "," + format_double(p.maturity) + "," +
                    format_double(p.vol));
        prev = p;
        ++count;
    }
    CHECK(count == 48);
    CHECK(seen.size() == 48);
}

TEST_CASE("degenerate singleton grid") {
    GridSpec one;
    one.spot = {55.0, 1.0, 1};
    one.strike = {40.0, 1.0, 1};
    one.rate = {0.02, 0.01, 1};
    one.maturity = {1.0, 1.0, 1};
    one.vol = {0.3, 0.1, 1};
    CHECK(one.cardinality() == 1);
    auto pts = sample_unique(one, 1, 99);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].spot == 55.0);
    CHECK(pts[0].vol == 0.3);
}

TEST_CASE("sample_unique determinism and distinctness") {
    GridSpec spec;
    const auto a = sample_unique(spec, 1000, 42);
    const auto b = sample_unique(spec, 1000, 42);
    REQUIRE(a.size() == 1000);
    bool identical = true;
    std::set<std::string> distinct;
    for (std::size_t i = 0; i < a.size(); ++i) {
        identical = identical && a[i].spot == b[i].spot && a[i].strike == b[i].strike &&
                    a[i].rate == b[i].rate && a[i].maturity == b[i].maturity &&
                    a[i].vol == b[i].vol;
        distinct.insert(format_double(a[i].spot) + "," + format_double(a[i].strike) + "," +
                        format_double(a[i].rate) + "," + format_double(a[i].maturity) + "," +
                        format_double(a[i].vol));
    }
    CHECK(identical);
    CHECK(distinct.size() == 1000);

    const auto c = sample_unique(spec, 1000, 43);
    bool differs = false;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i].spot != a[i].spot || c[i].strike != a[i].strike || c[i].vol != a[i].vol) {
            differs = true;
            break;
        }
    }
    CHECK(differs);
}

TEST_CASE("sample_unique edge cases") {
    GridSpec small;
    small.spot = {50.0, 1.0, 2};
    small.strike = {20.0, 5.0, 2};
    small.rate = {0.01, 0.01, 1};
    small.maturity = {0.25, 0.25, 1};
    small.vol = {0.1, 0.1, 1};

    CHECK(sample_unique(small, 0, 7).empty());

    // exhaustive sample returns the whole grid, shuffled
    const auto all = sample_unique(small, 4, 7);
    std::set<std::string> seen;
    for (const auto& p : all) seen.insert(format_double(p.spot) + "," + format_double(p.strike));
    CHECK(seen.size() == 4);

    try {
        sample_unique(small, 5, 7);
        FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("5") != std::string::npos);
        CHECK(msg.find("4") != std::string::npos);
    }
}
