#include "kinetgan/schema.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "kinetgan/rng.hpp"
#include "parse_util.hpp"

namespace kinetgan {

using detail::content_lines;
using detail::fail_at;
using detail::parse_double;
using detail::split;
using detail::split_ws;
using detail::trim;

int ColumnSpec::category_index(std::string_view value) const {
    for (std::size_t i = 0; i < categories.size(); ++i) {
        if (categories[i] == value) return static_cast<int>(i);
    }
    return -1;
}

int TableSchema::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

const ColumnSpec& TableSchema::column(std::string_view name) const {
    const int idx = column_index(name);
    if (idx < 0) throw Error("unknown column '" + std::string(name) + "'");
    return columns[static_cast<std::size_t>(idx)];
}

std::vector<int> TableSchema::conditional_indices() const {
    std::vector<int> out;
    out.reserve(conditional.size());
    for (const auto& name : conditional) out.push_back(column_index(name));
    return out;
}

void validate_schema(const TableSchema& schema) {
    if (schema.columns.empty()) throw Error("schema declares no columns");
    std::set<std::string> seen;
    for (const auto& col : schema.columns) {
        if (col.name.empty()) throw Error("empty column name");
        if (!seen.insert(col.name).second)
            throw Error("duplicate column '" + col.name + "'");
        if (col.is_categorical()) {
            if (col.cardinality() < 2)
                throw Error("column '" + col.name + "': cardinality must be >= 2");
            std::set<std::string> cats;
            for (const auto& c : col.categories) {
                if (c.empty())
                    throw Error("column '" + col.name + "': empty category name");
                if (!cats.insert(c).second)
                    throw Error("column '" + col.name + "': duplicate category '" + c + "'");
            }
        } else {
            if (!std::isfinite(col.lo) || !std::isfinite(col.hi))
                throw Error("column '" + col.name + "': bounds must be finite");
            if (!(col.lo < col.hi))
                throw Error("column '" + col.name + "': requires lo < hi");
        }
    }
    auto check_categorical = [&](const std::string& name, const char* role) {
        const int idx = schema.column_index(name);
        if (idx < 0)
            throw Error(std::string(role) + " names unknown column '" + name + "'");
        if (!schema.columns[static_cast<std::size_t>(idx)].is_categorical())
            throw Error(std::string(role) + " must be categorical ('" + name + "')");
    };
    if (!schema.label.empty()) check_categorical(schema.label, "label");
    std::set<std::string> cond_seen;
    for (const auto& name : schema.conditional) {
        check_categorical(name, "conditional");
        if (!cond_seen.insert(name).second)
            throw Error("duplicate conditional column '" + name + "'");
    }
}

TableSchema parse_schema(const std::string& text) {
    TableSchema schema;
    bool saw_label = false, saw_conditional = false;
    for (const auto& [line_no, line] : content_lines(text)) {
        const auto tok = split_ws(line);
        if (tok[0] == "column") {
            if (tok.size() < 4) fail_at("malformed column declaration", line_no);
            ColumnSpec col;
            col.name = tok[1];
            if (tok[2] == "categorical") {
                if (tok.size() != 4) fail_at("malformed categorical column", line_no);
                col.kind = ColumnKind::Categorical;
                for (auto& v : split(tok[3], ',')) {
                    v = trim(v);
                    if (v.empty()) fail_at("empty category name", line_no);
                    col.categories.push_back(v);
                }
            } else if (tok[2] == "continuous") {
                if (tok.size() != 5) fail_at("malformed continuous column", line_no);
                col.kind = ColumnKind::Continuous;
                if (!parse_double(tok[3], &col.lo) || !parse_double(tok[4], &col.hi))
                    fail_at("bad continuous bounds", line_no);
            } else {
                fail_at("unknown column kind '" + tok[2] + "'", line_no);
            }
            schema.columns.push_back(std::move(col));
        } else if (tok[0] == "label") {
            if (tok.size() != 2) fail_at("malformed label declaration", line_no);
            if (saw_label) fail_at("duplicate label declaration", line_no);
            schema.label = tok[1];
            saw_label = true;
        } else if (tok[0] == "conditional") {
            if (tok.size() != 2) fail_at("malformed conditional declaration", line_no);
            if (saw_conditional) fail_at("duplicate conditional declaration", line_no);
            for (auto& v : split(tok[1], ',')) {
                v = trim(v);
                if (v.empty()) fail_at("empty conditional name", line_no);
                schema.conditional.push_back(v);
            }
            saw_conditional = true;
        } else {
            fail_at("unknown directive '" + tok[0] + "'", line_no);
        }
    }
    validate_schema(schema);
    return schema;
}

TableSchema load_schema_file(const std::string& path) {
    return parse_schema(read_text_file(path));
}

namespace {

std::string format_bound(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.push_back(sep);
        out += parts[i];
    }
    return out;
}

}  // namespace

std::string schema_to_text(const TableSchema& schema) {
    std::string out;
    for (const auto& col : schema.columns) {
        out += "column " + col.name;
        if (col.is_categorical()) {
            out += " categorical " + join(col.categories, ',');
        } else {
            out += " continuous " + format_bound(col.lo) + " " + format_bound(col.hi);
        }
        out += "\n";
    }
    if (!schema.label.empty()) out += "label " + schema.label + "\n";
    if (!schema.conditional.empty()) out += "conditional " + join(schema.conditional, ',') + "\n";
    return out;
}

std::uint64_t schema_fingerprint(const TableSchema& schema) {
    return fnv1a64(schema_to_text(schema));
}

bool schema_equal(const TableSchema& a, const TableSchema& b) {
    return schema_to_text(a) == schema_to_text(b);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace kinetgan
