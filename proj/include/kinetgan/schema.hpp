#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kinetgan/error.hpp"

namespace kinetgan {

enum class ColumnKind { Categorical, Continuous };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Categorical;
    std::vector<std::string> categories;  // categorical only, cardinality >= 2
    double lo = 0.0;                      // continuous only, lo < hi
    double hi = 0.0;

    bool is_categorical() const { return kind == ColumnKind::Categorical; }
    std::size_t cardinality() const { return categories.size(); }

    // Index of a category name, -1 if not declared.
    int category_index(std::string_view value) const;
};

struct TableSchema {
    std::vector<ColumnSpec> columns;
    std::string label;                     // empty when no label declared
    std::vector<std::string> conditional;  // categorical column names, ordered

    int column_index(std::string_view name) const;  // -1 if unknown
    const ColumnSpec& column(std::string_view name) const;
    int label_index() const { return label.empty() ? -1 : column_index(label); }
    std::vector<int> conditional_indices() const;
};

// Parses the line-oriented schema grammar:
//   column <name> categorical <v1,v2,...>
//   column <name> continuous <lo> <hi>
//   label <name>
//   conditional <n1,n2,...>
// '#' starts a comment. Throws Error with a line number on bad input.
TableSchema parse_schema(const std::string& text);
TableSchema load_schema_file(const std::string& path);

// Canonical re-serialization (comments and spacing normalized away).
std::string schema_to_text(const TableSchema& schema);

// Digest of the canonical schema text; used to detect schema drift.
std::uint64_t schema_fingerprint(const TableSchema& schema);

// True when both schemas serialize to the same canonical text.
bool schema_equal(const TableSchema& a, const TableSchema& b);

void validate_schema(const TableSchema& schema);

std::string read_text_file(const std::string& path);

}  // namespace kinetgan
