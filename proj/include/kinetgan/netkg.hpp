#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kinetgan/dataset.hpp"
#include "kinetgan/encoder.hpp"
#include "kinetgan/rng.hpp"
#include "kinetgan/schema.hpp"

namespace kinetgan {

// Guarded constraint over flow attributes. The guard "when <col>=<val>"
// activates the body only on matching rows; "when *" is always on.
struct Constraint {
    enum class Kind { Range, Allow, Require };

    std::string id;
    bool guarded = false;
    int guard_col = -1;
    int guard_cat = -1;
    Kind kind = Kind::Range;
    int col = -1;
    double lo = 0.0, hi = 0.0;   // Range
    std::vector<char> allowed;   // Allow: membership mask over categories
    int required_cat = -1;       // Require
};

struct Verdict {
    bool valid = true;
    std::vector<std::string> violated;  // ids in constraint order
};

// Immutable after load; queries are read-only. Default-allow: rows touching
// no active constraint are valid.
struct KnowledgeBase {
    TableSchema schema;
    std::vector<Constraint> constraints;
    std::string source_text;  // raw rule text, kept for checkpoints
};

// Rule grammar (one rule per line, '#' comments):
//   range <col> when <gcol>=<gval> <min> <max>
//   allow <col> when <gcol>=<gval> in <v1,v2,...>
//   require <col>=<val> when <gcol>=<gval>
// The guard may be '*' for unconditional rules.
KnowledgeBase load_rules(const std::string& text, const TableSchema& schema);
KnowledgeBase load_rules_file(const std::string& path, const TableSchema& schema);

Verdict is_valid(const KnowledgeBase& kb, std::span<const double> row);
bool row_valid(const KnowledgeBase& kb, std::span<const double> row);

// Draws n rows that satisfy every constraint and agree with the condition on
// the conditional columns. Unconstrained cells are uniform over their allowed
// sets/ranges; rejection sampling is capped at 1000*n attempts.
Dataset sample_valid(const KnowledgeBase& kb, const ConditionVector& condition,
                     std::size_t n, Rng& rng);

// Fraction of rows with is_valid true. Throws on an empty dataset.
double validity_rate(const KnowledgeBase& kb, const Dataset& ds);

}  // namespace kinetgan
