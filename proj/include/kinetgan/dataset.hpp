#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kinetgan/schema.hpp"

namespace kinetgan {

// Rows stored row-major as doubles; categorical cells hold the category index
// (exact small integers), continuous cells hold the raw value in [lo, hi].
struct Dataset {
    TableSchema schema;
    std::size_t rows = 0;
    std::vector<double> cells;

    std::size_t cols() const { return schema.columns.size(); }
    double at(std::size_t r, std::size_t c) const { return cells[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return cells[r * cols() + c]; }
    int cat(std::size_t r, std::size_t c) const { return static_cast<int>(at(r, c)); }
    std::span<const double> row(std::size_t r) const {
        return {cells.data() + r * cols(), cols()};
    }
    void push_row(std::span<const double> row);
};

// Throws Error when a cell violates the schema (unknown index / out of range).
void validate_dataset(const Dataset& ds);

// CSV with a header row of column names in schema order. With clamp set,
// out-of-bound continuous values are clipped to [lo, hi] instead of rejected.
Dataset load_csv(const std::string& path, const TableSchema& schema, bool clamp = false);
Dataset parse_csv(const std::string& text, const TableSchema& schema, bool clamp = false);
void write_csv(const Dataset& ds, std::ostream& out);
void write_csv_file(const Dataset& ds, const std::string& path);
std::string dataset_to_csv(const Dataset& ds);

// Deterministic disjoint partition; |holdout| = round(fraction * rows).
// Both parts keep the original row order.
std::pair<Dataset, Dataset> split(const Dataset& ds, double holdout_fraction,
                                  std::uint64_t seed);

// Projection onto a column subset (schema order preserved within `cols`).
// `label` may be empty or name one of the kept columns. Conditional list is
// dropped; the result is for metric/classifier use.
Dataset select_columns(const Dataset& ds, const std::vector<std::string>& cols,
                       const std::string& label);

// %.12g formatting used for CSV cells (>= 9 significant digits round trip).
std::string format_cell(double v);

}  // namespace kinetgan
