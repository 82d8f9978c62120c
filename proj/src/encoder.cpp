#include "kinetgan/encoder.hpp"

#include <algorithm>
#include <cmath>

namespace kinetgan {

namespace {
constexpr double kBceEps = 1e-7;
}

double condition_bce(std::span<const double> bits, std::span<const double> probs) {
    if (bits.size() != probs.size())
        throw Error("condition_bce: length mismatch (" + std::to_string(bits.size()) + " vs " +
                    std::to_string(probs.size()) + ")");
    if (bits.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        const double t = bits[i];
        const double p = std::clamp(probs[i], kBceEps, 1.0 - kBceEps);
        total += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
    }
    return total / static_cast<double>(bits.size());
}

double condition_bce(const ConditionVector& c, std::span<const double> probs) {
    return condition_bce(std::span<const double>(c.bits), probs);
}

Encoder::Encoder(const TableSchema& schema) : schema_(schema) {
    validate_schema(schema_);
    offsets_.reserve(schema_.columns.size());
    widths_.reserve(schema_.columns.size());
    for (const auto& col : schema_.columns) {
        offsets_.push_back(row_width_);
        const std::size_t w = col.is_categorical() ? col.cardinality() : 1;
        widths_.push_back(w);
        row_width_ += w;
    }
    for (const auto& name : schema_.conditional) {
        const auto c = static_cast<std::size_t>(schema_.column_index(name));
        cond_cols_.push_back(c);
        cond_offsets_.push_back(cond_width_);
        cond_width_ += widths_[c];
    }
}

void Encoder::encode_row(std::span<const double> row, std::span<double> out) const {
    if (row.size() != schema_.columns.size()) throw Error("encode_row: row arity mismatch");
    if (out.size() != row_width_) throw Error("encode_row: output size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t c = 0; c < row.size(); ++c) {
        const auto& col = schema_.columns[c];
        if (col.is_categorical()) {
            const auto idx = static_cast<std::size_t>(row[c]);
            out[offsets_[c] + idx] = 1.0;
        } else {
            out[offsets_[c]] = (row[c] - col.lo) / (col.hi - col.lo);
        }
    }
}

std::vector<double> Encoder::encode_row(std::span<const double> row) const {
    std::vector<double> out(row_width_);
    encode_row(row, out);
    return out;
}

std::vector<double> Encoder::decode_vector(std::span<const double> encoded) const {
    if (encoded.size() != row_width_)
        throw Error("decode_vector: expected length " + std::to_string(row_width_) + ", got " +
                    std::to_string(encoded.size()));
    std::vector<double> row(schema_.columns.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
        const auto& col = schema_.columns[c];
        const std::size_t off = offsets_[c];
        if (col.is_categorical()) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < widths_[c]; ++i) {
                if (encoded[off + i] > encoded[off + best]) best = i;
            }
            row[c] = static_cast<double>(best);
        } else {
            const double v = std::clamp(encoded[off], 0.0, 1.0);
            row[c] = col.lo + v * (col.hi - col.lo);
        }
    }
    return row;
}

ConditionVector Encoder::build_condition(std::span<const int> assignment) const {
    if (assignment.size() != cond_cols_.size())
        throw Error("condition assignment must cover all " + std::to_string(cond_cols_.size()) +
                    " conditional attributes");
    ConditionVector cv;
    cv.assignment.assign(assignment.begin(), assignment.end());
    cv.bits.assign(cond_width_, 0.0);
    for (std::size_t k = 0; k < cond_cols_.size(); ++k) {
        const auto card = static_cast<int>(conditional_cardinality(k));
        if (assignment[k] < 0 || assignment[k] >= card)
            throw Error("condition assignment out of range for '" + schema_.conditional[k] + "'");
        cv.bits[cond_offsets_[k] + static_cast<std::size_t>(assignment[k])] = 1.0;
    }
    return cv;
}

ConditionVector Encoder::build_condition(
    const std::vector<std::pair<std::string, std::string>>& assignment) const {
    const auto partial = parse_partial_condition(assignment);
    std::vector<int> full(partial.size());
    for (std::size_t k = 0; k < partial.size(); ++k) {
        if (!partial[k])
            throw Error("condition missing assignment for '" + schema_.conditional[k] + "'");
        full[k] = *partial[k];
    }
    return build_condition(full);
}

std::vector<std::optional<int>> Encoder::parse_partial_condition(
    const std::vector<std::pair<std::string, std::string>>& assignment) const {
    std::vector<std::optional<int>> out(cond_cols_.size());
    for (const auto& [name, value] : assignment) {
        int slot = -1;
        for (std::size_t k = 0; k < cond_cols_.size(); ++k) {
            if (schema_.conditional[k] == name) {
                slot = static_cast<int>(k);
                break;
            }
        }
        if (slot < 0) throw Error("'" + name + "' is not a conditional attribute");
        const auto& col = schema_.columns[cond_cols_[static_cast<std::size_t>(slot)]];
        const int idx = col.category_index(value);
        if (idx < 0)
            throw Error("'" + value + "' is not a category of '" + name + "'");
        if (out[static_cast<std::size_t>(slot)])
            throw Error("duplicate condition assignment for '" + name + "'");
        out[static_cast<std::size_t>(slot)] = idx;
    }
    return out;
}

ConditionVector Encoder::sample_condition(Rng& rng) const {
    if (cond_cols_.empty()) throw Error("schema has no conditional attributes");
    std::vector<int> assignment(cond_cols_.size());
    for (std::size_t k = 0; k < cond_cols_.size(); ++k) {
        assignment[k] = static_cast<int>(rng.uniform_index(conditional_cardinality(k)));
    }
    return build_condition(assignment);
}

}  // namespace kinetgan
