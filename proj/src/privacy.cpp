#include "kinetgan/privacy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

#include "kinetgan/evalsuite.hpp"

namespace kinetgan {

namespace {

// One-hot L1 over categorical cells plus L2 over normalized continuous cells,
// restricted to `cols`.
double row_distance(const Dataset& a, std::size_t ra, const Dataset& b, std::size_t rb,
                    const std::vector<std::size_t>& cols) {
    double cat_part = 0.0, cont_sq = 0.0;
    for (const std::size_t c : cols) {
        const auto& spec = a.schema.columns[c];
        if (spec.is_categorical()) {
            if (a.cat(ra, c) != b.cat(rb, c)) cat_part += 2.0;
        } else {
            const double d = (a.at(ra, c) - b.at(rb, c)) / (spec.hi - spec.lo);
            cont_sq += d * d;
        }
    }
    return cat_part + std::sqrt(cont_sq);
}

std::vector<std::size_t> resolve_columns(const TableSchema& schema,
                                         const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    for (const auto& name : names) {
        const int idx = schema.column_index(name);
        if (idx < 0) throw Error("unknown column '" + name + "'");
        out.push_back(static_cast<std::size_t>(idx));
    }
    return out;
}

std::size_t nearest_row(const Dataset& synth, const Dataset& real, std::size_t r,
                        const std::vector<std::size_t>& cols) {
    std::size_t best = 0;
    double best_d = row_distance(real, r, synth, 0, cols);
    for (std::size_t s = 1; s < synth.rows; ++s) {
        const double d = row_distance(real, r, synth, s, cols);
        if (d < best_d) {
            best_d = d;
            best = s;
        }
    }
    return best;
}

}  // namespace

std::vector<std::string> default_quasi_columns(const TableSchema& schema) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto add = [&](const std::string& name) {
        if (seen.insert(name).second) out.push_back(name);
    };
    for (const auto& name : schema.conditional) add(name);
    for (const auto& col : schema.columns) {
        std::string lower = col.name;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (lower == "protocol" || lower == "proto" || lower.find("port") != std::string::npos)
            add(col.name);
    }
    return out;
}

AttackReport reident_attack(const Dataset& real, const Dataset& synth, double overlap_fraction,
                            const std::vector<std::string>& quasi_cols, std::uint64_t seed) {
    if (!schema_equal(real.schema, synth.schema))
        throw Error("reident_attack: datasets have different schemas");
    if (real.rows == 0 || synth.rows == 0) throw Error("reident_attack: empty dataset");
    if (!(overlap_fraction > 0.0 && overlap_fraction <= 1.0))
        throw Error("reident_attack: overlap fraction must lie in (0, 1]");
    if (quasi_cols.empty()) throw Error("reident_attack: quasi columns must be non-empty");

    const auto quasi = resolve_columns(real.schema, quasi_cols);
    std::vector<std::size_t> hidden_cats;
    for (std::size_t c = 0; c < real.cols(); ++c) {
        if (std::find(quasi.begin(), quasi.end(), c) == quasi.end() &&
            real.schema.columns[c].is_categorical())
            hidden_cats.push_back(c);
    }
    if (hidden_cats.empty())
        throw Error("reident_attack: quasi columns leave no categorical column to predict");

    // Seeded permutation; the known set is its prefix, so larger overlaps are
    // supersets of smaller ones under the same seed.
    std::vector<std::size_t> perm(real.rows);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (std::size_t i = real.rows; i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    }
    const auto known = static_cast<std::size_t>(
        std::llround(overlap_fraction * static_cast<double>(real.rows)));
    if (known == 0) throw Error("reident_attack: overlap selects no rows");

    std::size_t recovered = 0;
    for (std::size_t i = 0; i < known; ++i) {
        const std::size_t r = perm[i];
        const std::size_t s = nearest_row(synth, real, r, quasi);
        bool all = true;
        for (const std::size_t c : hidden_cats) {
            if (real.cat(r, c) != synth.cat(s, c)) {
                all = false;
                break;
            }
        }
        recovered += all ? 1 : 0;
    }

    double chance = 1.0;
    for (const std::size_t c : hidden_cats) {
        chance /= static_cast<double>(real.schema.columns[c].cardinality());
    }

    AttackReport report;
    report.attack = "reident";
    report.params["overlap"] = overlap_fraction;
    report.params["quasi"] = quasi_cols;
    report.accuracy = static_cast<double>(recovered) / static_cast<double>(known);
    report.baseline = chance;
    report.trials = known;
    return report;
}

AttackReport attribute_inference(const Dataset& real_test, const Dataset& synth,
                                 const std::string& sensitive_col,
                                 const std::vector<std::string>& quasi_cols,
                                 std::uint64_t seed) {
    if (!schema_equal(real_test.schema, synth.schema))
        throw Error("attribute_inference: datasets have different schemas");
    const int sens = real_test.schema.column_index(sensitive_col);
    if (sens < 0)
        throw Error("attribute_inference: sensitive column '" + sensitive_col + "' missing");
    if (!real_test.schema.columns[static_cast<std::size_t>(sens)].is_categorical())
        throw Error("attribute_inference: sensitive column must be categorical");
    if (quasi_cols.empty()) throw Error("attribute_inference: quasi columns must be non-empty");
    for (const auto& q : quasi_cols) {
        if (q == sensitive_col)
            throw Error("attribute_inference: sensitive column overlaps quasi set");
        if (real_test.schema.column_index(q) < 0)
            throw Error("attribute_inference: unknown quasi column '" + q + "'");
    }
    if (real_test.rows == 0 || synth.rows == 0) throw Error("attribute_inference: empty dataset");

    std::vector<std::string> kept = quasi_cols;
    kept.push_back(sensitive_col);
    const Dataset synth_view = select_columns(synth, kept, sensitive_col);
    const Dataset test_view = select_columns(real_test, kept, sensitive_col);

    const SoftmaxClassifier clf = fit_classifier(synth_view, sensitive_col, {}, seed);
    const double acc = classification_accuracy(clf, test_view);

    std::vector<std::size_t> counts(
        real_test.schema.columns[static_cast<std::size_t>(sens)].cardinality(), 0);
    for (std::size_t r = 0; r < real_test.rows; ++r) {
        ++counts[static_cast<std::size_t>(real_test.cat(r, static_cast<std::size_t>(sens)))];
    }
    const double majority = static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
                            static_cast<double>(real_test.rows);

    AttackReport report;
    report.attack = "attrib";
    report.params["sensitive"] = sensitive_col;
    report.params["quasi"] = quasi_cols;
    report.accuracy = acc;
    report.baseline = majority;
    report.trials = real_test.rows;
    return report;
}

AttackReport membership_inference(const GanModel* model, const Dataset* synth,
                                  const Dataset& members, const Dataset& nonmembers,
                                  MiaMode mode, std::uint64_t seed) {
    if (members.rows != nonmembers.rows)
        throw Error("membership_inference: candidate sets must be balanced");
    if (members.rows == 0) throw Error("membership_inference: empty candidate sets");
    if (!schema_equal(members.schema, nonmembers.schema))
        throw Error("membership_inference: candidate sets have different schemas");

    const std::size_t n = members.rows;
    std::vector<double> scores(2 * n);

    if (mode == MiaMode::WhiteBox) {
        if (!model) throw Error("membership_inference: white-box mode needs a model");
        if (!schema_equal(model->schema, members.schema))
            throw Error("membership_inference: candidates do not match the model schema");
        const Encoder enc(model->schema);
        const std::size_t W = enc.row_width();
        const std::size_t CB = enc.cond_width();
        auto score_set = [&](const Dataset& ds, std::size_t base) {
            Matrix x(ds.rows, W + CB);
            std::vector<int> assignment(enc.n_conditional());
            for (std::size_t r = 0; r < ds.rows; ++r) {
                enc.encode_row(ds.row(r), {x.row(r), W});
                for (std::size_t k = 0; k < enc.n_conditional(); ++k)
                    assignment[k] = ds.cat(r, enc.conditional_column(k));
                const ConditionVector cv = enc.build_condition(assignment);
                std::copy(cv.bits.begin(), cv.bits.end(), x.row(r) + W);
            }
            const Matrix s = forward(model->disc_data, x);
            for (std::size_t r = 0; r < ds.rows; ++r) scores[base + r] = s.at(r, 0);
        };
        score_set(members, 0);
        score_set(nonmembers, n);
    } else {
        if (!synth) throw Error("membership_inference: black-box mode needs synthetic data");
        if (!schema_equal(synth->schema, members.schema))
            throw Error("membership_inference: candidates do not match the synthetic data");
        if (synth->rows == 0) throw Error("membership_inference: empty synthetic data");
        std::vector<std::size_t> all_cols(members.cols());
        std::iota(all_cols.begin(), all_cols.end(), 0);
        auto score_set = [&](const Dataset& ds, std::size_t base) {
            for (std::size_t r = 0; r < ds.rows; ++r) {
                const std::size_t s = nearest_row(*synth, ds, r, all_cols);
                scores[base + r] = -row_distance(ds, r, *synth, s, all_cols);
            }
        };
        score_set(members, 0);
        score_set(nonmembers, n);
    }

    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    const double threshold = 0.5 * (sorted[n - 1] + sorted[n]);

    std::size_t correct = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (scores[r] > threshold) ++correct;          // member predicted member
        if (scores[n + r] <= threshold) ++correct;     // nonmember predicted nonmember
    }

    AttackReport report;
    report.attack = "mia";
    report.params["mode"] = mode == MiaMode::WhiteBox ? "WB" : "FBB";
    report.params["seed"] = seed;
    report.accuracy = static_cast<double>(correct) / static_cast<double>(2 * n);
    report.baseline = 0.5;
    report.trials = 2 * n;
    return report;
}

nlohmann::ordered_json AttackReport::to_json() const {
    nlohmann::ordered_json j;
    j["attack"] = attack;
    j["params"] = params;
    j["accuracy"] = accuracy;
    j["baseline"] = baseline;
    j["trials"] = trials;
    return j;
}

}  // namespace kinetgan
