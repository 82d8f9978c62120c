#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kinetgan/rng.hpp"
#include "kinetgan/schema.hpp"

namespace kinetgan {

// One-hot condition over the schema's conditional attributes: a category
// choice per attribute plus the concatenated one-hot blocks.
struct ConditionVector {
    std::vector<int> assignment;  // category index per conditional attribute
    std::vector<double> bits;     // concatenated one-hot blocks
};

// Mean binary cross entropy between target bits and probabilities, entries
// clamped to [1e-7, 1 - 1e-7]. Throws on length mismatch.
double condition_bce(std::span<const double> bits, std::span<const double> probs);
double condition_bce(const ConditionVector& c, std::span<const double> probs);

// Row <-> vector codec. Layout follows schema column order: each categorical
// column contributes a one-hot block of its cardinality, each continuous
// column one min-max-normalized slot in [0, 1].
class Encoder {
public:
    explicit Encoder(const TableSchema& schema);

    const TableSchema& schema() const { return schema_; }
    std::size_t row_width() const { return row_width_; }
    std::size_t cond_width() const { return cond_width_; }
    std::size_t n_conditional() const { return cond_cols_.size(); }

    // Block layout of column c within the encoded row.
    std::size_t block_offset(std::size_t c) const { return offsets_[c]; }
    std::size_t block_width(std::size_t c) const { return widths_[c]; }

    // Layout of conditional attribute k: its column, its block inside the
    // encoded row, and its block inside the condition bits.
    std::size_t conditional_column(std::size_t k) const { return cond_cols_[k]; }
    std::size_t conditional_row_offset(std::size_t k) const { return offsets_[cond_cols_[k]]; }
    std::size_t conditional_bits_offset(std::size_t k) const { return cond_offsets_[k]; }
    std::size_t conditional_cardinality(std::size_t k) const { return widths_[cond_cols_[k]]; }

    void encode_row(std::span<const double> row, std::span<double> out) const;
    std::vector<double> encode_row(std::span<const double> row) const;

    // Argmax per categorical block (ties to the lowest index); continuous
    // slots denormalized and clipped to [lo, hi]. Throws on length mismatch.
    std::vector<double> decode_vector(std::span<const double> encoded) const;

    // Condition construction. The full-assignment form requires one in-range
    // category index per conditional attribute, in schema conditional order.
    ConditionVector build_condition(std::span<const int> assignment) const;
    // Name/value form; must cover every conditional attribute exactly.
    ConditionVector build_condition(
        const std::vector<std::pair<std::string, std::string>>& assignment) const;

    // Uniform independent draw per conditional attribute.
    ConditionVector sample_condition(Rng& rng) const;

    // Parses "col=val,col=val" against the conditional attributes; entries may
    // cover a subset. Returns one optional slot per conditional attribute.
    std::vector<std::optional<int>> parse_partial_condition(
        const std::vector<std::pair<std::string, std::string>>& assignment) const;

private:
    TableSchema schema_;
    std::vector<std::size_t> offsets_;       // per column, into encoded row
    std::vector<std::size_t> widths_;        // per column (cardinality or 1)
    std::vector<std::size_t> cond_cols_;     // conditional attr -> column index
    std::vector<std::size_t> cond_offsets_;  // conditional attr -> offset in bits
    std::size_t row_width_ = 0;
    std::size_t cond_width_ = 0;
};

}  // namespace kinetgan
