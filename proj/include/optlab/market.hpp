#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "optlab/data_matrix.hpp"
#include "optlab/errors.hpp"

// Option-chain snapshot ingestion: parse quotes, filter illiquid rows, build
// mid-price targets, compute ACT/365 maturities and interpolate risk-free
// rates off a par-yield curve.

namespace optlab {

// Calendar date with civil-day arithmetic (proleptic Gregorian).
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    // days since 1970-01-01
    long serial() const {
        const int y = year - (month <= 2);
        const int era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return era * 146097L + static_cast<long>(doe) - 719468L;
    }

    static Date parse_iso(std::string_view s) {
        auto fail = [&] { throw ParseError("bad ISO date: " + std::string(s)); };
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail();
        Date d;
        auto num = [&](std::string_view part, int& out) {
            auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
            if (ec != std::errc() || p != part.data() + part.size()) fail();
        };
        num(s.substr(0, 4), d.year);
        num(s.substr(5, 2), d.month);
        num(s.substr(8, 2), d.day);
        if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) fail();
        return d;
    }

    bool operator==(const Date&) const = default;
};

/// ACT/365 fixed year fraction between two dates.
inline double year_fraction(const Date& valuation, const Date& expiry) {
    const long days = expiry.serial() - valuation.serial();
    if (days < 0) throw InvalidArgument("expiry before valuation date");
    return static_cast<double>(days) / 365.0;
}

struct OptionQuote {
    std::string contract;
    double strike = 0.0;
    Date expiry;
    double bid = 0.0;
    double ask = 0.0;
    double implied_vol = 0.0;
};

/// Midpoint of bid and ask.
inline double mid_price(double bid, double ask) {
    if (!(bid >= 0.0) || !(ask >= bid)) {
        throw InvalidArgument("mid_price requires ask >= bid >= 0");
    }
    return 0.5 * (bid + ask);
}

struct ChainLoadResult {
    std::vector<OptionQuote> quotes;
    std::size_t dropped = 0;  // rows removed by the liquidity filter
};

// CSV header: contract,strike,expiry,bid,ask,implied_vol. Rows with bid <= 0,
// ask < bid or implied_vol <= 0 are dropped and counted.
inline ChainLoadResult parse_option_chain(const std::string& text) {
    ChainLoadResult result;
    std::size_t pos = 0, line_no = 0;
    auto next_line = [&](std::string_view& line) -> bool {
        if (pos >= text.size()) return false;
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        line = std::string_view(text).substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = end + 1;
        ++line_no;
        return true;
    };
    std::string_view header;
    if (!next_line(header)) throw ParseError("empty option chain file");
    if (header != "contract,strike,expiry,bid,ask,implied_vol") {
        throw ParseError("option chain header must be contract,strike,expiry,bid,ask,implied_vol");
    }
    std::string_view line;
    while (next_line(line)) {
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        for (std::size_t start = 0; start <= line.size();) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string_view::npos) comma = line.size();
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 6) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 6 fields, got " +
                             std::to_string(fields.size()));
        }
        auto num = [&](std::string_view s, const char* what) {
            double v = 0.0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size()) {
                throw ParseError("line " + std::to_string(line_no) + ": bad " + what);
            }
            return v;
        };
        OptionQuote q;
        q.contract = std::string(fields[0]);
        q.strike = num(fields[1], "strike");
        try {
            q.expiry = Date::parse_iso(fields[2]);
        } catch (const ParseError&) {
            throw ParseError("line " + std::to_string(line_no) + ": bad expiry date");
        }
        q.bid = num(fields[3], "bid");
        q.ask = num(fields[4], "ask");
        q.implied_vol = num(fields[5], "implied_vol");
        if (q.strike <= 0.0) {
            throw ParseError("line " + std::to_string(line_no) + ": non-positive strike");
        }
        const bool liquid = q.bid > 0.0 && q.ask >= q.bid && q.implied_vol > 0.0 &&
                            std::isfinite(q.implied_vol);
        if (liquid) {
            result.quotes.push_back(std::move(q));
        } else {
            ++result.dropped;
        }
    }
    return result;
}

inline ChainLoadResult load_option_chain(const std::filesystem::path& path) {
    auto result = parse_option_chain(read_file(path));
    if (result.quotes.empty()) {
        throw DataError("no quotes left after filtering " + path.string());
    }
    return result;
}

// Ordered (tenor years, par yield) knots, strictly increasing tenors.
struct YieldCurve {
    std::vector<double> tenors;
    std::vector<double> yields;

    void validate() const {
        if (tenors.size() != yields.size() || tenors.size() < 2) {
            throw InvalidArgument("yield curve needs at least 2 knots");
        }
        double prev = 0.0;
        for (double t : tenors) {
            if (!(t > prev)) throw InvalidArgument("curve tenors must be positive and strictly increasing");
            prev = t;
        }
    }
};

/// Piecewise-linear yield at maturity T, clamped to the end knots outside the
/// tenor range.
inline double interpolate_rate(const YieldCurve& curve, double maturity) {
    curve.validate();
    if (!(maturity > 0.0)) throw InvalidArgument("maturity must be > 0 for rate lookup");
    if (maturity <= curve.tenors.front()) return curve.yields.front();
    if (maturity >= curve.tenors.back()) return curve.yields.back();
    std::size_t hi = 1;
    while (curve.tenors[hi] < maturity) ++hi;
    const double t0 = curve.tenors[hi - 1], t1 = curve.tenors[hi];
    const double w = (maturity - t0) / (t1 - t0);
    return (1.0 - w) * curve.yields[hi - 1] + w * curve.yields[hi];
}

// CSV: tenor_years,par_yield (decimals).
inline YieldCurve parse_yield_curve(const std::string& text) {
    YieldCurve curve;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line = std::string_view(text).substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "tenor_years,par_yield") {
                throw ParseError("yield curve header must be tenor_years,par_yield");
            }
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string_view::npos) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 2 fields");
        }
        auto num = [&](std::string_view s) {
            double v = 0.0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size()) {
                throw ParseError("line " + std::to_string(line_no) + ": bad number");
            }
            return v;
        };
        curve.tenors.push_back(num(line.substr(0, comma)));
        curve.yields.push_back(num(line.substr(comma + 1)));
    }
    curve.validate();
    return curve;
}

inline YieldCurve load_yield_curve(const std::filesystem::path& path) {
    return parse_yield_curve(read_file(path));
}

// Rows of (S = spot, K, r = interpolated, T = ACT/365, sigma = quoted implied
// vol) with the bid/ask midpoint as target.
inline DataMatrix build_market_dataset(const std::vector<OptionQuote>& quotes,
                                       const YieldCurve& curve, double spot,
                                       const Date& valuation) {
    curve.validate();
    if (!(spot > 0.0)) throw InvalidArgument("spot must be > 0");
    DataMatrix out(std::vector<std::string>{"S", "K", "r", "T", "sigma"}, quotes.size());
    for (const auto& q : quotes) {
        try {
            const double t = year_fraction(valuation, q.expiry);
            const double r = interpolate_rate(curve, t);
            const double target = mid_price(q.bid, q.ask);
            const double features[] = {spot, q.strike, r, t, q.implied_vol};
            out.add_row(features, target);
        } catch (const std::exception& e) {
            throw DataError("contract " + q.contract + ": " + e.what());
        }
    }
    out.ensure_finite_targets();
    return out;
}

}  // namespace optlab
