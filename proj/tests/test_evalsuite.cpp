#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "kinetgan/evalsuite.hpp"
#include "kinetgan/rng.hpp"
#include "kinetgan/world.hpp"
#include "test_support.hpp"

using namespace kinetgan;

namespace {

TableSchema one_cont_schema(double lo, double hi) {
    return parse_schema("column x continuous " + std::to_string(lo) + " " + std::to_string(hi) +
                        "\ncolumn pad categorical a,b\n");
}

Dataset cont_dataset(const TableSchema& schema, const std::vector<double>& xs) {
    Dataset ds;
    ds.schema = schema;
    for (const double x : xs) {
        const double row[2] = {x, 0.0};
        ds.push_row(row);
    }
    return ds;
}

TableSchema one_cat_schema() {
    return parse_schema("column c categorical A,B,C\ncolumn pad continuous 0 1\n");
}

Dataset cat_dataset(const std::vector<int>& cats) {
    Dataset ds;
    ds.schema = one_cat_schema();
    for (const int c : cats) {
        const double row[2] = {static_cast<double>(c), 0.5};
        ds.push_row(row);
    }
    return ds;
}

// Minimum-cost perfect matching between equal-size samples, by enumeration.
// In one dimension sorted matching is optimal; this is the independent check.
double brute_force_emd(std::vector<double> a, std::vector<double> b) {
    std::vector<std::size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) cost += std::abs(a[i] - b[perm[i]]);
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(a.size());
}

double brute_force_tv(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<std::size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) cost += a[i] == b[perm[i]] ? 0.0 : 1.0;
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("column_emd hand values") {
    const auto schema = one_cont_schema(0, 2);
    // identical samples
    const auto same = cont_dataset(schema, {0.3, 1.1, 1.9});
    CHECK(column_emd(same, same, std::size_t{0}) == 0.0);

    // real {0,1}, synth {1,2} on [0,2]: normalized {0,0.5} vs {0.5,1}
    const auto real = cont_dataset(schema, {0.0, 1.0});
    const auto synth = cont_dataset(schema, {1.0, 2.0});
    CHECK(column_emd(real, synth, std::size_t{0}) == doctest::Approx(0.5).epsilon(1e-12));

    // unequal sizes: {0} vs {0,1} -> CDFs differ by 0.5 over the whole range
    const auto single = cont_dataset(schema, {0.0});
    const auto pair = cont_dataset(schema, {0.0, 2.0});
    CHECK(column_emd(single, pair, std::size_t{0}) == doctest::Approx(0.5).epsilon(1e-12));

    // categorical: real {A:0.5, B:0.5} vs synth {A:1.0} -> TV 0.5
    const auto cat_real = cat_dataset({0, 1});
    const auto cat_synth = cat_dataset({0, 0});
    CHECK(column_emd(cat_real, cat_synth, std::size_t{0}) == doctest::Approx(0.5).epsilon(1e-12));

    Dataset empty;
    empty.schema = schema;
    CHECK_THROWS_AS(column_emd(real, empty, std::size_t{0}), Error);
    CHECK_THROWS_AS(column_emd(real, cat_real, std::size_t{0}), Error);
    CHECK_THROWS_AS(column_emd(real, synth, std::string("nope")), Error);
}

TEST_CASE("column_emd equals brute-force minimum-cost matching on small samples") {
    const auto schema = one_cont_schema(0, 1);
    Rng rng(512);
    for (int instance = 0; instance < 60; ++instance) {
        const std::size_t n = 1 + rng.uniform_index(8);
        std::vector<double> a(n), b(n);
        // a mix of smooth values and a coarse grid to exercise ties
        for (auto& v : a) v = rng.uniform_index(2) ? rng.uniform01()
                                                   : std::round(rng.uniform01() * 4.0) / 4.0;
        for (auto& v : b) v = rng.uniform_index(2) ? rng.uniform01()
                                                   : std::round(rng.uniform01() * 4.0) / 4.0;
        const double expected = brute_force_emd(a, b);
        const double actual = column_emd(cont_dataset(schema, a), cont_dataset(schema, b),
                                         std::size_t{0});
        CHECK(std::abs(actual - expected) < 1e-9);
    }
}

TEST_CASE("categorical column_emd equals brute-force 0/1 matching on small samples") {
    Rng rng(513);
    for (int instance = 0; instance < 40; ++instance) {
        const std::size_t n = 1 + rng.uniform_index(7);
        std::vector<int> a(n), b(n);
        for (auto& v : a) v = static_cast<int>(rng.uniform_index(3));
        for (auto& v : b) v = static_cast<int>(rng.uniform_index(3));
        const double expected = brute_force_tv(a, b);
        const double actual = column_emd(cat_dataset(a), cat_dataset(b), std::size_t{0});
        CHECK(std::abs(actual - expected) < 1e-9);
    }
}

TEST_CASE("column_emd is symmetric and separates different distributions") {
    const auto schema = one_cont_schema(0, 1);
    Rng rng(99);
    std::vector<double> a(40), b(40);
    for (auto& v : a) v = rng.uniform01() * 0.5;
    for (auto& v : b) v = 0.5 + rng.uniform01() * 0.5;
    const auto da = cont_dataset(schema, a);
    const auto db = cont_dataset(schema, b);
    CHECK(column_emd(da, db, std::size_t{0}) == column_emd(db, da, std::size_t{0}));
    CHECK(column_emd(da, db, std::size_t{0}) > 0.0);
    CHECK(column_emd(da, da, std::size_t{0}) == 0.0);
}

TEST_CASE("mixed_distance hand values") {
    // identical datasets
    const auto cats = cat_dataset({0, 1, 2, 0});
    CHECK(mixed_distance(cats, cats) == 0.0);

    // one categorical column dominating: freqs {0.5, 0.5, 0} vs {1, 0, 0}
    // L1 = 1.0; the pad continuous column contributes 0 -> mean 0.5
    const auto catsb = cat_dataset({0, 0, 1, 1});
    const auto catsc = cat_dataset({0, 0, 0, 0});
    CHECK(mixed_distance(catsb, catsc) == doctest::Approx(0.5).epsilon(1e-12));

    // continuous: all mass in bin 1 vs bin 2 -> L2 = sqrt(2); pad categorical
    // contributes 0 -> mean sqrt(2)/2
    const auto schema = one_cont_schema(0, 1);
    const auto bin1 = cont_dataset(schema, {0.01, 0.02, 0.03});
    const auto bin2 = cont_dataset(schema, {0.06, 0.07, 0.08});
    CHECK(mixed_distance(bin1, bin2) ==
          doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));

    // symmetry
    CHECK(mixed_distance(bin1, bin2) == mixed_distance(bin2, bin1));
}

TEST_CASE("fidelity_report aggregates per-column values and serializes") {
    const auto world = load_world_file(kinetgan::test::data_file("lab.world"));
    const auto kb = load_rules_file(kinetgan::test::data_file("lab.rules"), world.schema);
    const auto a = simulate_corpus(world, 400, 1);
    const auto b = simulate_corpus(world, 400, 2);

    const auto same = fidelity_report(a, a, &kb);
    CHECK(same.mean_emd == 0.0);
    CHECK(same.mixed_distance == 0.0);
    REQUIRE(same.validity_rate.has_value());
    CHECK(*same.validity_rate == 1.0);

    const auto report = fidelity_report(a, b);
    CHECK(report.per_column_emd.size() == a.cols());
    double sum = 0.0;
    for (const auto& [name, emd] : report.per_column_emd) sum += emd;
    CHECK(report.mean_emd == doctest::Approx(sum / a.cols()).epsilon(1e-12));
    CHECK_FALSE(report.validity_rate.has_value());

    const auto j = report.to_json();
    CHECK(j.contains("per_column_emd"));
    CHECK(j.contains("mean_emd"));
    CHECK(j.contains("mixed_distance"));
    CHECK(j["per_column_emd"].size() == a.cols());
}

namespace {

// Linearly separable two-class set: class = (x > 0.5), with margin.
Dataset separable_dataset(std::size_t n, Rng& rng) {
    Dataset ds;
    ds.schema = parse_schema(
        "column y categorical no,yes\n"
        "column x continuous 0 1\n"
        "label y\n");
    for (std::size_t i = 0; i < n; ++i) {
        const bool yes = rng.uniform_index(2) == 1;
        const double x = yes ? 0.6 + 0.4 * rng.uniform01() : 0.4 * rng.uniform01();
        const double row[2] = {yes ? 1.0 : 0.0, x};
        ds.push_row(row);
    }
    return ds;
}

}  // namespace

TEST_CASE("fit_classifier learns a separable toy set deterministically") {
    Rng rng(600);
    const auto train = separable_dataset(200, rng);
    const auto clf = fit_classifier(train, "y", {0.5, 800}, 42);
    CHECK(classification_accuracy(clf, train) >= 0.99);

    const auto clf2 = fit_classifier(train, "y", {0.5, 800}, 42);
    CHECK(clf.net.layers[0].w.a == clf2.net.layers[0].w.a);

    CHECK_THROWS_AS(fit_classifier(train, "missing", {}, 1), Error);

    Dataset single;
    single.schema = train.schema;
    const double row[2] = {0.0, 0.2};
    single.push_row(row);
    single.push_row(row);
    CHECK_THROWS_AS(fit_classifier(single, "y", {}, 1), Error);
}

TEST_CASE("tstr_utility equals trtr when synthetic is the real training set") {
    Rng rng(601);
    const auto train = separable_dataset(150, rng);
    const auto test = separable_dataset(60, rng);
    const auto result = tstr_utility(train, train, test, "y", {0.5, 400}, 7);
    CHECK(result.acc_tstr == result.acc_trtr);
    CHECK(result.acc_trtr >= 0.95);

    Dataset empty;
    empty.schema = train.schema;
    CHECK_THROWS_AS(tstr_utility(train, train, empty, "y", {}, 7), Error);
}

TEST_CASE("tstr_utility is invariant to the row order of its inputs") {
    Rng rng(602);
    const auto train = separable_dataset(120, rng);
    const auto test = separable_dataset(50, rng);

    // reversed-row copies
    auto reversed = [](const Dataset& ds) {
        Dataset out;
        out.schema = ds.schema;
        for (std::size_t r = ds.rows; r-- > 0;) out.push_row(ds.row(r));
        return out;
    };
    const auto base = tstr_utility(train, train, test, "y", {0.5, 300}, 7);
    const auto shuffled =
        tstr_utility(reversed(train), reversed(train), reversed(test), "y", {0.5, 300}, 7);
    CHECK(base.acc_tstr == doctest::Approx(shuffled.acc_tstr).epsilon(1e-12));
    CHECK(base.acc_trtr == doctest::Approx(shuffled.acc_trtr).epsilon(1e-12));
}

TEST_CASE("a class absent from training scores as misclassified, not an error") {
    Dataset train;
    train.schema = parse_schema(
        "column y categorical a,b,c\n"
        "column x continuous 0 1\n"
        "label y\n");
    for (int i = 0; i < 40; ++i) {
        const double row[2] = {static_cast<double>(i % 2), i % 2 ? 0.9 : 0.1};
        train.push_row(row);  // only classes a and b
    }
    Dataset test;
    test.schema = train.schema;
    const double unseen[2] = {2.0, 0.5};
    test.push_row(unseen);
    const auto clf = fit_classifier(train, "y", {0.5, 200}, 3);
    CHECK(classification_accuracy(clf, test) == 0.0);
}
