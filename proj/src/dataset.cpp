#include "kinetgan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "kinetgan/rng.hpp"
#include "parse_util.hpp"

namespace kinetgan {

using detail::parse_double;
using detail::trim;

void Dataset::push_row(std::span<const double> row) {
    if (row.size() != cols()) throw Error("row arity mismatch");
    cells.insert(cells.end(), row.begin(), row.end());
    ++rows;
}

void validate_dataset(const Dataset& ds) {
    if (ds.cells.size() != ds.rows * ds.cols()) throw Error("dataset cell count mismatch");
    for (std::size_t r = 0; r < ds.rows; ++r) {
        for (std::size_t c = 0; c < ds.cols(); ++c) {
            const auto& col = ds.schema.columns[c];
            const double v = ds.at(r, c);
            if (col.is_categorical()) {
                const int idx = static_cast<int>(v);
                if (v != idx || idx < 0 || idx >= static_cast<int>(col.cardinality()))
                    throw Error("row " + std::to_string(r + 1) + ", column " + col.name +
                                ": bad category index");
            } else if (!(v >= col.lo && v <= col.hi)) {
                throw Error("row " + std::to_string(r + 1) + ", column " + col.name +
                            ": value out of bounds");
            }
        }
    }
}

namespace {

// Minimal CSV field split: commas, optional double quotes with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

Dataset parse_csv(const std::string& text, const TableSchema& schema, bool clamp) {
    Dataset ds;
    ds.schema = schema;

    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("empty CSV input");
    const auto header = split_csv_line(line);
    if (header.size() != schema.columns.size())
        throw Error("CSV header has " + std::to_string(header.size()) + " columns, schema has " +
                    std::to_string(schema.columns.size()));
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (trim(header[c]) != schema.columns[c].name)
            throw Error("CSV header column " + std::to_string(c + 1) + " is '" +
                        trim(header[c]) + "', expected '" + schema.columns[c].name + "'");
    }

    std::vector<double> row(schema.columns.size());
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row_no;
        const auto fields = split_csv_line(line);
        if (fields.size() != schema.columns.size())
            throw Error("row " + std::to_string(row_no) + ": expected " +
                        std::to_string(schema.columns.size()) + " cells, got " +
                        std::to_string(fields.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto& col = schema.columns[c];
            const std::string cell = trim(fields[c]);
            if (col.is_categorical()) {
                const int idx = col.category_index(cell);
                if (idx < 0)
                    throw Error("row " + std::to_string(row_no) + ", column " + col.name +
                                ": unknown category '" + cell + "'");
                row[c] = idx;
            } else {
                double v = 0.0;
                if (!parse_double(cell, &v))
                    throw Error("row " + std::to_string(row_no) + ", column " + col.name +
                                ": bad number '" + cell + "'");
                if (v < col.lo || v > col.hi) {
                    if (!clamp)
                        throw Error("row " + std::to_string(row_no) + ", column " + col.name +
                                    ": value " + cell + " outside [" + format_cell(col.lo) +
                                    ", " + format_cell(col.hi) + "]");
                    v = std::clamp(v, col.lo, col.hi);
                }
                row[c] = v;
            }
        }
        ds.push_row(row);
    }
    return ds;
}

Dataset load_csv(const std::string& path, const TableSchema& schema, bool clamp) {
    return parse_csv(read_text_file(path), schema, clamp);
}

std::string format_cell(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_csv(const Dataset& ds, std::ostream& out) {
    for (std::size_t c = 0; c < ds.cols(); ++c) {
        if (c) out << ',';
        out << ds.schema.columns[c].name;
    }
    out << '\n';
    for (std::size_t r = 0; r < ds.rows; ++r) {
        for (std::size_t c = 0; c < ds.cols(); ++c) {
            if (c) out << ',';
            const auto& col = ds.schema.columns[c];
            if (col.is_categorical()) {
                out << col.categories[static_cast<std::size_t>(ds.cat(r, c))];
            } else {
                out << format_cell(ds.at(r, c));
            }
        }
        out << '\n';
    }
}

std::string dataset_to_csv(const Dataset& ds) {
    std::ostringstream ss;
    write_csv(ds, ss);
    return ss.str();
}

void write_csv_file(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file '" + path + "'");
    write_csv(ds, out);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double holdout_fraction,
                                  std::uint64_t seed) {
    if (!(holdout_fraction >= 0.0 && holdout_fraction <= 1.0))
        throw Error("holdout fraction must be in [0, 1]");
    const std::size_t n = ds.rows;
    const auto k = static_cast<std::size_t>(
        std::llround(holdout_fraction * static_cast<double>(n)));

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    }

    std::vector<char> held(n, 0);
    for (std::size_t i = 0; i < k; ++i) held[perm[i]] = 1;

    Dataset train, holdout;
    train.schema = ds.schema;
    holdout.schema = ds.schema;
    for (std::size_t r = 0; r < n; ++r) {
        (held[r] ? holdout : train).push_row(ds.row(r));
    }
    return {std::move(train), std::move(holdout)};
}

Dataset select_columns(const Dataset& ds, const std::vector<std::string>& cols,
                       const std::string& label) {
    Dataset out;
    std::vector<std::size_t> idx;
    for (const auto& name : cols) {
        const int c = ds.schema.column_index(name);
        if (c < 0) throw Error("select_columns: unknown column '" + name + "'");
        idx.push_back(static_cast<std::size_t>(c));
        out.schema.columns.push_back(ds.schema.columns[static_cast<std::size_t>(c)]);
    }
    out.schema.label = label;
    validate_schema(out.schema);
    std::vector<double> row(idx.size());
    for (std::size_t r = 0; r < ds.rows; ++r) {
        for (std::size_t j = 0; j < idx.size(); ++j) row[j] = ds.at(r, idx[j]);
        out.push_row(row);
    }
    return out;
}

}  // namespace kinetgan
