#include "kinetgan/netkg.hpp"

#include <algorithm>
#include <cmath>

#include "parse_util.hpp"

namespace kinetgan {

using detail::content_lines;
using detail::fail_at;
using detail::parse_double;
using detail::split;
using detail::split_ws;
using detail::trim;

namespace {

// "<col>=<val>" -> (column index, category index); "*" -> (-1, -1).
std::pair<int, int> parse_guard(const std::string& token, const TableSchema& schema,
                                int line_no) {
    if (token == "*") return {-1, -1};
    const auto eq = token.find('=');
    if (eq == std::string::npos) fail_at("guard must be '<col>=<val>' or '*'", line_no);
    const std::string col_name = token.substr(0, eq);
    const std::string val = token.substr(eq + 1);
    const int col = schema.column_index(col_name);
    if (col < 0) fail_at("guard names unknown column '" + col_name + "'", line_no);
    const auto& spec = schema.columns[static_cast<std::size_t>(col)];
    if (!spec.is_categorical()) fail_at("guard column must be categorical", line_no);
    const int cat = spec.category_index(val);
    if (cat < 0) fail_at("guard value '" + val + "' not declared for " + col_name, line_no);
    return {col, cat};
}

bool guard_matches(const Constraint& c, std::span<const double> row) {
    if (!c.guarded) return true;
    return static_cast<int>(row[static_cast<std::size_t>(c.guard_col)]) == c.guard_cat;
}

bool body_satisfied(const Constraint& c, std::span<const double> row) {
    const double v = row[static_cast<std::size_t>(c.col)];
    switch (c.kind) {
        case Constraint::Kind::Range:
            return v >= c.lo && v <= c.hi;
        case Constraint::Kind::Allow:
            return c.allowed[static_cast<std::size_t>(static_cast<int>(v))] != 0;
        case Constraint::Kind::Require:
            return static_cast<int>(v) == c.required_cat;
    }
    return true;
}

}  // namespace

KnowledgeBase load_rules(const std::string& text, const TableSchema& schema) {
    validate_schema(schema);
    KnowledgeBase kb;
    kb.schema = schema;
    kb.source_text = text;

    for (const auto& [line_no, line] : content_lines(text)) {
        const auto tok = split_ws(line);
        Constraint c;
        if (tok[0] == "range") {
            // range <col> when <guard> <min> <max>
            if (tok.size() != 6 || tok[2] != "when") fail_at("malformed range rule", line_no);
            c.kind = Constraint::Kind::Range;
            c.col = schema.column_index(tok[1]);
            if (c.col < 0) fail_at("unknown column '" + tok[1] + "'", line_no);
            const auto& spec = schema.columns[static_cast<std::size_t>(c.col)];
            if (spec.is_categorical()) fail_at("range rule on categorical column", line_no);
            std::tie(c.guard_col, c.guard_cat) = parse_guard(tok[3], schema, line_no);
            c.guarded = c.guard_col >= 0;
            if (!parse_double(tok[4], &c.lo) || !parse_double(tok[5], &c.hi))
                fail_at("bad range bounds", line_no);
            if (c.lo > c.hi || c.lo < spec.lo || c.hi > spec.hi)
                fail_at("range outside column bounds", line_no);
            c.id = "range:" + tok[1] + ":L" + std::to_string(line_no);
        } else if (tok[0] == "allow") {
            // allow <col> when <guard> in <v1,v2,...>
            if (tok.size() != 6 || tok[2] != "when" || tok[4] != "in")
                fail_at("malformed allow rule", line_no);
            c.kind = Constraint::Kind::Allow;
            c.col = schema.column_index(tok[1]);
            if (c.col < 0) fail_at("unknown column '" + tok[1] + "'", line_no);
            const auto& spec = schema.columns[static_cast<std::size_t>(c.col)];
            if (!spec.is_categorical()) fail_at("allow rule on continuous column", line_no);
            std::tie(c.guard_col, c.guard_cat) = parse_guard(tok[3], schema, line_no);
            c.guarded = c.guard_col >= 0;
            c.allowed.assign(spec.cardinality(), 0);
            for (auto& v : split(tok[5], ',')) {
                v = trim(v);
                const int idx = spec.category_index(v);
                if (idx < 0)
                    fail_at("allow lists undeclared category '" + v + "'", line_no);
                c.allowed[static_cast<std::size_t>(idx)] = 1;
            }
            c.id = "allow:" + tok[1] + ":L" + std::to_string(line_no);
        } else if (tok[0] == "require") {
            // require <col>=<val> when <guard>
            if (tok.size() != 4 || tok[2] != "when") fail_at("malformed require rule", line_no);
            c.kind = Constraint::Kind::Require;
            const auto eq = tok[1].find('=');
            if (eq == std::string::npos) fail_at("require needs '<col>=<val>'", line_no);
            const std::string col_name = tok[1].substr(0, eq);
            c.col = schema.column_index(col_name);
            if (c.col < 0) fail_at("unknown column '" + col_name + "'", line_no);
            const auto& spec = schema.columns[static_cast<std::size_t>(c.col)];
            if (!spec.is_categorical()) fail_at("require rule on continuous column", line_no);
            c.required_cat = spec.category_index(tok[1].substr(eq + 1));
            if (c.required_cat < 0) fail_at("require value not declared", line_no);
            std::tie(c.guard_col, c.guard_cat) = parse_guard(tok[3], schema, line_no);
            c.guarded = c.guard_col >= 0;
            c.id = "require:" + col_name + ":L" + std::to_string(line_no);
        } else {
            fail_at("unknown rule kind '" + tok[0] + "'", line_no);
        }
        kb.constraints.push_back(std::move(c));
    }
    return kb;
}

KnowledgeBase load_rules_file(const std::string& path, const TableSchema& schema) {
    return load_rules(read_text_file(path), schema);
}

Verdict is_valid(const KnowledgeBase& kb, std::span<const double> row) {
    if (row.size() != kb.schema.columns.size())
        throw Error("is_valid: row arity does not match knowledge base schema");
    Verdict v;
    for (const auto& c : kb.constraints) {
        if (guard_matches(c, row) && !body_satisfied(c, row)) {
            v.valid = false;
            v.violated.push_back(c.id);
        }
    }
    return v;
}

bool row_valid(const KnowledgeBase& kb, std::span<const double> row) {
    for (const auto& c : kb.constraints) {
        if (guard_matches(c, row) && !body_satisfied(c, row)) return false;
    }
    return true;
}

Dataset sample_valid(const KnowledgeBase& kb, const ConditionVector& condition,
                     std::size_t n, Rng& rng) {
    const Encoder enc(kb.schema);
    if (condition.assignment.size() != enc.n_conditional())
        throw Error("sample_valid: condition does not match schema conditional list");

    const std::size_t n_cols = kb.schema.columns.size();
    std::vector<int> pinned(n_cols, -1);  // category pinned by the condition
    for (std::size_t k = 0; k < enc.n_conditional(); ++k) {
        pinned[enc.conditional_column(k)] = condition.assignment[k];
    }

    // Per-column domains narrowed by constraints whose guard is already
    // decided by the condition. Guards on free columns are left to rejection.
    std::vector<std::vector<char>> masks(n_cols);
    std::vector<double> lo(n_cols), hi(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
        const auto& spec = kb.schema.columns[c];
        if (spec.is_categorical()) {
            masks[c].assign(spec.cardinality(), 1);
        } else {
            lo[c] = spec.lo;
            hi[c] = spec.hi;
        }
    }
    for (const auto& c : kb.constraints) {
        if (c.guarded) {
            const int pin = pinned[static_cast<std::size_t>(c.guard_col)];
            if (pin < 0 || pin != c.guard_cat) continue;  // inactive or undecided
        }
        const auto col = static_cast<std::size_t>(c.col);
        switch (c.kind) {
            case Constraint::Kind::Range:
                lo[col] = std::max(lo[col], c.lo);
                hi[col] = std::min(hi[col], c.hi);
                if (lo[col] > hi[col])
                    throw Error("unsatisfiable condition: constraint " + c.id +
                                " empties the range of " + kb.schema.columns[col].name);
                break;
            case Constraint::Kind::Allow: {
                bool any = false;
                for (std::size_t i = 0; i < masks[col].size(); ++i) {
                    masks[col][i] = masks[col][i] && c.allowed[i];
                    any = any || masks[col][i];
                }
                if (!any)
                    throw Error("unsatisfiable condition: constraint " + c.id +
                                " empties the allowed set of " + kb.schema.columns[col].name);
                break;
            }
            case Constraint::Kind::Require: {
                bool kept = false;
                for (std::size_t i = 0; i < masks[col].size(); ++i) {
                    masks[col][i] = masks[col][i] && (static_cast<int>(i) == c.required_cat);
                    kept = kept || masks[col][i];
                }
                if (!kept)
                    throw Error("unsatisfiable condition: constraint " + c.id +
                                " conflicts on " + kb.schema.columns[col].name);
                break;
            }
        }
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (pinned[c] >= 0 && !masks[c][static_cast<std::size_t>(pinned[c])]) {
            throw Error("unsatisfiable condition: assigned category of " +
                        kb.schema.columns[c].name + " is excluded by the constraints");
        }
    }

    // Uniform proposal over the narrowed domains.
    std::vector<std::vector<int>> choices(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (!kb.schema.columns[c].is_categorical() || pinned[c] >= 0) continue;
        for (std::size_t i = 0; i < masks[c].size(); ++i) {
            if (masks[c][i]) choices[c].push_back(static_cast<int>(i));
        }
    }

    Dataset out;
    out.schema = kb.schema;
    std::vector<double> row(n_cols);
    const std::size_t budget = 1000 * n;
    std::size_t attempts = 0;
    while (out.rows < n) {
        if (attempts >= budget)
            throw Error("sample_valid: rejection budget exceeded (" + std::to_string(budget) +
                        " attempts)");
        ++attempts;
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (pinned[c] >= 0) {
                row[c] = static_cast<double>(pinned[c]);
            } else if (kb.schema.columns[c].is_categorical()) {
                row[c] = static_cast<double>(choices[c][rng.uniform_index(choices[c].size())]);
            } else {
                row[c] = rng.uniform(lo[c], hi[c]);
            }
        }
        if (row_valid(kb, row)) out.push_row(row);
    }
    return out;
}

double validity_rate(const KnowledgeBase& kb, const Dataset& ds) {
    if (ds.rows == 0) throw Error("validity_rate: empty dataset");
    if (!schema_equal(kb.schema, ds.schema))
        throw Error("validity_rate: dataset schema does not match knowledge base");
    std::size_t valid = 0;
    for (std::size_t r = 0; r < ds.rows; ++r) {
        if (row_valid(kb, ds.row(r))) ++valid;
    }
    return static_cast<double>(valid) / static_cast<double>(ds.rows);
}

}  // namespace kinetgan
