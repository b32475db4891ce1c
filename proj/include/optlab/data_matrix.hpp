#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "optlab/errors.hpp"
#include "optlab/io.hpp"

namespace optlab {

// Feature rows plus one target column, with ordered column names. This is the
// exchange type between data generation, learners and evaluation.
//
// Canonical on-disk form is CSV with header `<features...>,price` and values
// written at 17 significant digits (exact double round trip). The base
// synthetic/market datasets use the fixed header `S,K,r,T,sigma,price`.
class DataMatrix {
public:
    DataMatrix() = default;

    DataMatrix(std::vector<std::string> columns, std::size_t reserve_rows = 0)
        : columns_(std::move(columns)) {
        values_.reserve(reserve_rows * columns_.size());
        target_.reserve(reserve_rows);
    }

    std::size_t rows() const { return target_.size(); }
    std::size_t cols() const { return columns_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }
    const std::string& target_name() const { return target_name_; }

    int column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (columns_[i] == name) return static_cast<int>(i);
        }
        return -1;
    }

    double at(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }
    double& at(std::size_t row, std::size_t col) { return values_[row * cols() + col]; }

    std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * cols(), cols()};
    }

    double target(std::size_t row) const { return target_[row]; }
    double& target(std::size_t row) { return target_[row]; }
    const std::vector<double>& targets() const { return target_; }
    std::vector<double>& targets() { return target_; }

    void add_row(std::span<const double> features, double target) {
        if (features.size() != cols()) {
            throw InvalidArgument("row arity " + std::to_string(features.size()) +
                                  " does not match column count " + std::to_string(cols()));
        }
        values_.insert(values_.end(), features.begin(), features.end());
        target_.push_back(target);
    }

    // Appends a column computed elsewhere; used by feature engineering.
    void add_column(const std::string& name, const std::vector<double>& col) {
        if (col.size() != rows()) throw InvalidArgument("column length mismatch");
        if (column_index(name) >= 0) throw InvalidArgument("duplicate column name: " + name);
        std::vector<double> next;
        next.reserve(rows() * (cols() + 1));
        for (std::size_t r = 0; r < rows(); ++r) {
            auto old = row(r);
            next.insert(next.end(), old.begin(), old.end());
            next.push_back(col[r]);
        }
        values_ = std::move(next);
        columns_.push_back(name);
    }

    DataMatrix select_rows(std::span<const std::size_t> idx) const {
        DataMatrix out(columns_, idx.size());
        out.target_name_ = target_name_;
        for (std::size_t i : idx) out.add_row(row(i), target_[i]);
        return out;
    }

    void ensure_finite_targets() const {
        for (std::size_t r = 0; r < rows(); ++r) {
            if (!std::isfinite(target_[r])) {
                throw DataError("non-finite target at row " + std::to_string(r));
            }
        }
    }

    std::string to_csv() const {
        std::string out;
        out.reserve(rows() * cols() * 20 + 64);
        for (std::size_t c = 0; c < cols(); ++c) {
            out += columns_[c];
            out += ',';
        }
        out += target_name_;
        out += '\n';
        for (std::size_t r = 0; r < rows(); ++r) {
            for (std::size_t c = 0; c < cols(); ++c) {
                out += format_double(at(r, c));
                out += ',';
            }
            out += format_double(target_[r]);
            out += '\n';
        }
        return out;
    }

    void write_csv(const std::filesystem::path& path) const { write_file_atomic(path, to_csv()); }

    static DataMatrix from_csv(const std::string& text) {
        DataMatrix out;
        std::size_t pos = 0;
        std::size_t line_no = 0;
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
        if (!next_line(header) || header.empty()) throw ParseError("empty CSV");
        std::vector<std::string> names;
        for (std::size_t start = 0; start <= header.size();) {
            std::size_t comma = header.find(',', start);
            if (comma == std::string_view::npos) comma = header.size();
            names.emplace_back(header.substr(start, comma - start));
            start = comma + 1;
        }
        if (names.size() < 2) throw ParseError("CSV header needs at least one feature and a target");
        out.target_name_ = names.back();
        names.pop_back();
        out.columns_ = std::move(names);

        std::string_view line;
        std::vector<double> fields(out.cols() + 1);
        while (next_line(line)) {
            if (line.empty()) continue;
            std::size_t start = 0, field = 0;
            while (start <= line.size() && field < fields.size()) {
                std::size_t comma = line.find(',', start);
                if (comma == std::string_view::npos) comma = line.size();
                const char* b = line.data() + start;
                const char* e = line.data() + comma;
                auto [p, ec] = std::from_chars(b, e, fields[field]);
                if (ec != std::errc() || p != e) {
                    throw ParseError("line " + std::to_string(line_no) + ": bad number in field " +
                                     std::to_string(field + 1));
                }
                ++field;
                start = comma + 1;
                if (comma == line.size()) break;
            }
            if (field != fields.size()) {
                throw ParseError("line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(fields.size()) + " fields, got " +
                                 std::to_string(field));
            }
            out.values_.insert(out.values_.end(), fields.begin(), fields.end() - 1);
            out.target_.push_back(fields.back());
        }
        return out;
    }

    static DataMatrix read_csv(const std::filesystem::path& path) {
        return from_csv(read_file(path));
    }

private:
    std::vector<std::string> columns_;
    std::string target_name_ = "price";
    std::vector<double> values_;  // row-major
    std::vector<double> target_;
};

}  // namespace optlab
