#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "optlab/data_matrix.hpp"
#include "optlab/errors.hpp"
#include "optlab/io.hpp"

namespace optlab {

namespace detail {
inline void check_pair(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) {
        throw InvalidArgument("actual/predicted length mismatch: " +
                              std::to_string(actual.size()) + " vs " +
                              std::to_string(predicted.size()));
    }
    if (actual.empty()) throw InvalidArgument("metrics need at least one observation");
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (!std::isfinite(actual[i]) || !std::isfinite(predicted[i])) {
            throw InvalidArgument("non-finite value at index " + std::to_string(i));
        }
    }
}
}  // namespace detail

inline double mse(std::span<const double> actual, std::span<const double> predicted) {
    detail::check_pair(actual, predicted);
    double acc = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - predicted[i];
        acc += d * d;
    }
    return acc / static_cast<double>(actual.size());
}

inline double mae(std::span<const double> actual, std::span<const double> predicted) {
    detail::check_pair(actual, predicted);
    double acc = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        acc += std::abs(actual[i] - predicted[i]);
    }
    return acc / static_cast<double>(actual.size());
}

// R^2 = 1 - SS_res/SS_tot with SS_tot about the mean of `actual`. A constant
// actual has no variance to explain; that is reported as UndefinedResult
// rather than a number.
inline double r2(std::span<const double> actual, std::span<const double> predicted) {
    detail::check_pair(actual, predicted);
    double mean = 0.0;
    for (double a : actual) mean += a;
    mean /= static_cast<double>(actual.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    }
    if (ss_tot == 0.0) throw UndefinedResult("R^2 is undefined for a constant target");
    return 1.0 - ss_res / ss_tot;
}

struct BinnedMae {
    std::string dimension;
    std::vector<double> edges;        // strictly increasing, >= 2
    std::vector<std::size_t> counts;  // edges.size() - 1 bins
    std::vector<double> bin_mae;      // NaN where a bin is empty
    std::size_t overflow = 0;         // rows outside [edges.front(), edges.back()]
};

// Assigns each row to the half-open bin [e_i, e_{i+1}) (last bin closed) on
// the named column and reports per-bin MAE.
inline BinnedMae binned_mae(const DataMatrix& rows, std::span<const double> predictions,
                            const std::string& bin_column, std::span<const double> edges) {
    if (edges.size() < 2) throw InvalidArgument("need at least 2 bin edges");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) throw InvalidArgument("bin edges must be strictly increasing");
    }
    const int col = rows.column_index(bin_column);
    if (col < 0) throw SchemaError("binned_mae: no column named " + bin_column);
    if (predictions.size() != rows.rows()) throw InvalidArgument("prediction count mismatch");

    BinnedMae out;
    out.dimension = bin_column;
    out.edges.assign(edges.begin(), edges.end());
    const std::size_t nbins = edges.size() - 1;
    out.counts.assign(nbins, 0);
    std::vector<double> abs_sum(nbins, 0.0);
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        const double v = rows.at(r, col);
        if (v < edges.front() || v > edges.back()) {
            ++out.overflow;
            continue;
        }
        std::size_t b = static_cast<std::size_t>(
            std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
        b = (b == 0) ? 0 : b - 1;
        if (b >= nbins) b = nbins - 1;  // last bin closed on the right
        ++out.counts[b];
        abs_sum[b] += std::abs(rows.target(r) - predictions[r]);
    }
    out.bin_mae.assign(nbins, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t b = 0; b < nbins; ++b) {
        if (out.counts[b] > 0) out.bin_mae[b] = abs_sum[b] / static_cast<double>(out.counts[b]);
    }
    return out;
}

inline std::vector<double> equal_width_edges(std::span<const double> values, std::size_t bins) {
    if (values.empty()) throw InvalidArgument("no values to bin");
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) hi = lo + 1.0;
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    return edges;
}

struct Timing {
    std::optional<double> fit_seconds;  // absent for formula pricers
    double predict_seconds = 0.0;       // median of repeated full-dataset passes
    std::size_t rows_timed = 0;
};

// Median wall-clock over `repetitions` full prediction passes, run
// single-threaded unless the predictor itself opts in to parallelism.
inline double benchmark_predict(const std::function<void()>& predict_pass, int repetitions) {
    if (repetitions < 3) throw InvalidArgument("benchmark needs at least 3 repetitions");
    std::vector<double> times(repetitions);
    for (int i = 0; i < repetitions; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        predict_pass();
        const auto t1 = std::chrono::steady_clock::now();
        times[i] = std::chrono::duration<double>(t1 - t0).count();
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

// Metrics, optional binned tables and optional timing for one
// (model, dataset) pair.
struct MetricsReport {
    std::string model;
    std::string dataset;
    std::size_t rows = 0;
    double mse = 0.0;
    double mae = 0.0;
    double r2 = 0.0;
    std::vector<BinnedMae> bins;
    std::optional<Timing> timing;
};

inline MetricsReport compute_report(const std::string& model, const std::string& dataset,
                                    const DataMatrix& rows, std::span<const double> predictions) {
    MetricsReport rep;
    rep.model = model;
    rep.dataset = dataset;
    rep.rows = rows.rows();
    rep.mse = mse(rows.targets(), predictions);
    rep.mae = mae(rows.targets(), predictions);
    rep.r2 = r2(rows.targets(), predictions);
    return rep;
}

namespace detail {
inline void check_report(const MetricsReport& r) {
    if (r.mse < 0.0 || r.mae < 0.0) throw NumericalError("negative error metric");
    // Jensen: mean|e| <= sqrt(mean e^2); allow float slack
    if (r.mae > std::sqrt(r.mse) * (1.0 + 1e-12) + 1e-300) {
        throw NumericalError("MAE exceeds RMSE in report for " + r.model);
    }
    if (r.r2 > 1.0 + 1e-12) throw NumericalError("R^2 above 1 in report for " + r.model);
}
}  // namespace detail

inline nlohmann::json report_to_json(const MetricsReport& r) {
    detail::check_report(r);
    nlohmann::json j;
    j["model"] = r.model;
    j["dataset"] = r.dataset;
    j["rows"] = r.rows;
    j["mse"] = r.mse;
    j["mae"] = r.mae;
    j["r2"] = r.r2;
    if (!r.bins.empty()) {
        j["bins"] = nlohmann::json::array();
        for (const auto& b : r.bins) {
            nlohmann::json jb;
            jb["dimension"] = b.dimension;
            jb["edges"] = b.edges;
            jb["counts"] = b.counts;
            jb["mae"] = nlohmann::json::array();
            for (double m : b.bin_mae) {
                if (std::isnan(m)) {
                    jb["mae"].push_back(nullptr);
                } else {
                    jb["mae"].push_back(m);
                }
            }
            jb["overflow"] = b.overflow;
            j["bins"].push_back(jb);
        }
    }
    if (r.timing) {
        nlohmann::json jt;
        if (r.timing->fit_seconds) {
            jt["fit_seconds"] = *r.timing->fit_seconds;
        } else {
            jt["fit_seconds"] = nullptr;
        }
        jt["predict_seconds"] = r.timing->predict_seconds;
        jt["rows_timed"] = r.timing->rows_timed;
        j["timing"] = jt;
    }
    return j;
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
    MetricsReport r;
    r.model = j.at("model");
    r.dataset = j.at("dataset");
    r.rows = j.at("rows");
    r.mse = j.at("mse");
    r.mae = j.at("mae");
    r.r2 = j.at("r2");
    if (j.contains("bins")) {
        for (const auto& jb : j.at("bins")) {
            BinnedMae b;
            b.dimension = jb.at("dimension");
            b.edges = jb.at("edges").get<std::vector<double>>();
            b.counts = jb.at("counts").get<std::vector<std::size_t>>();
            for (const auto& m : jb.at("mae")) {
                b.bin_mae.push_back(m.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                : m.get<double>());
            }
            b.overflow = jb.at("overflow");
            r.bins.push_back(std::move(b));
        }
    }
    if (j.contains("timing")) {
        Timing t;
        const auto& jt = j.at("timing");
        if (!jt.at("fit_seconds").is_null()) t.fit_seconds = jt.at("fit_seconds").get<double>();
        t.predict_seconds = jt.at("predict_seconds");
        t.rows_timed = jt.at("rows_timed");
        r.timing = t;
    }
    return r;
}

// report.csv: one row per (model, dataset); timing columns empty when not
// measured.
inline std::string reports_to_csv(const std::vector<MetricsReport>& reports) {
    std::string out = "model,dataset,rows,mse,mae,r2,fit_seconds,predict_seconds\n";
    for (const auto& r : reports) {
        detail::check_report(r);
        out += r.model + "," + r.dataset + "," + std::to_string(r.rows) + "," +
               format_double(r.mse) + "," + format_double(r.mae) + "," + format_double(r.r2) + ",";
        if (r.timing && r.timing->fit_seconds) out += format_double(*r.timing->fit_seconds);
        out += ",";
        if (r.timing) out += format_double(r.timing->predict_seconds);
        out += "\n";
    }
    return out;
}

inline void emit_report(const std::vector<MetricsReport>& reports,
                        const std::filesystem::path& dir) {
    if (reports.empty()) throw InvalidArgument("no reports to emit");
    write_file_atomic(dir / "report.csv", reports_to_csv(reports));
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports) j.push_back(report_to_json(r));
    write_file_atomic(dir / "report.json", j.dump(2) + "\n");
    // gnuplot-friendly per-dimension tables
    for (const auto& r : reports) {
        for (const auto& b : r.bins) {
            std::string csv = "model,bin_lo,bin_hi,count,mae\n";
            for (std::size_t i = 0; i + 1 < b.edges.size(); ++i) {
                csv += r.model + "," + format_double(b.edges[i]) + "," +
                       format_double(b.edges[i + 1]) + "," + std::to_string(b.counts[i]) + ",";
                if (!std::isnan(b.bin_mae[i])) csv += format_double(b.bin_mae[i]);
                csv += "\n";
            }
            write_file_atomic(dir / ("bins_" + b.dimension + "_" + r.model + ".csv"), csv);
        }
    }
}

}  // namespace optlab
