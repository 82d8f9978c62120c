#include <cmath>

#include "doctest.h"
#include "kinetgan/dataset.hpp"
#include "kinetgan/netkg.hpp"
#include "kinetgan/rng.hpp"
#include "kinetgan/schema.hpp"
#include "kinetgan/world.hpp"
#include "test_support.hpp"

using namespace kinetgan;

TEST_CASE("parse_schema builds columns, label and conditional list") {
    const auto schema = parse_schema(
        "column protocol categorical TCP,UDP,ICMP\n"
        "column dst_port continuous 0 65535\n"
        "label protocol\n"
        "conditional protocol\n");
    REQUIRE(schema.columns.size() == 2);
    CHECK(schema.columns[0].is_categorical());
    CHECK(schema.columns[0].cardinality() == 3);
    CHECK(schema.columns[1].lo == 0.0);
    CHECK(schema.columns[1].hi == 65535.0);
    CHECK(schema.label == "protocol");
    REQUIRE(schema.conditional.size() == 1);
    CHECK(schema.conditional_indices()[0] == 0);
}

TEST_CASE("parse_schema rejects bad declarations") {
    // conditional naming a continuous column
    CHECK_THROWS_WITH_AS(parse_schema("column p categorical a,b\n"
                                      "column dst_port continuous 0 10\n"
                                      "conditional dst_port\n"),
                         doctest::Contains("conditional must be categorical"), Error);
    // duplicate column
    CHECK_THROWS_AS(parse_schema("column p categorical a,b\ncolumn p categorical a,b\n"), Error);
    // label naming unknown column
    CHECK_THROWS_AS(parse_schema("column p categorical a,b\nlabel q\n"), Error);
    // cardinality 1
    CHECK_THROWS_AS(parse_schema("column p categorical only\n"), Error);
    // continuous bounds inverted
    CHECK_THROWS_AS(parse_schema("column x continuous 5 1\n"), Error);
    // syntax error carries a line number
    CHECK_THROWS_WITH_AS(parse_schema("column p categorical a,b\nbogus line here\n"),
                         doctest::Contains("line 2"), Error);
}

TEST_CASE("UNSW-NB15 schema file declares 49 columns") {
    const auto schema = load_schema_file(kinetgan::test::data_file("unsw_nb15.schema"));
    CHECK(schema.columns.size() == 49);
    CHECK(schema.label == "attack_cat");
    CHECK(schema.conditional.size() == 1);
}

TEST_CASE("schema canonical text and fingerprint are stable") {
    const auto a = parse_schema("# comment\ncolumn p categorical x,y  \nlabel p\n");
    const auto b = parse_schema("column p categorical x,y\nlabel p\n");
    CHECK(schema_to_text(a) == schema_to_text(b));
    CHECK(schema_fingerprint(a) == schema_fingerprint(b));
    const auto c = parse_schema("column p categorical x,z\nlabel p\n");
    CHECK(schema_fingerprint(a) != schema_fingerprint(c));
}

namespace {

TableSchema csv_schema() {
    return parse_schema(
        "column protocol categorical TCP,UDP,ICMP\n"
        "column dst_port continuous 0 65535\n");
}

}  // namespace

TEST_CASE("load_csv accepts conforming rows") {
    const auto ds = parse_csv("protocol,dst_port\nTCP,80\nUDP,53\nICMP,0\n", csv_schema());
    REQUIRE(ds.rows == 3);
    CHECK(ds.cat(0, 0) == 0);
    CHECK(ds.at(1, 1) == 53.0);
}

TEST_CASE("load_csv names the row and column of a bad category") {
    CHECK_THROWS_WITH_AS(
        parse_csv("protocol,dst_port\nTCP,80\nSCTP,53\n", csv_schema()),
        doctest::Contains("row 2, column protocol"), Error);
}

TEST_CASE("load_csv clamps out-of-bound continuous cells only when asked") {
    const char* text = "protocol,dst_port\nTCP,70000\n";
    CHECK_THROWS_AS(parse_csv(text, csv_schema(), false), Error);
    const auto ds = parse_csv(text, csv_schema(), true);
    CHECK(ds.at(0, 1) == 65535.0);
}

TEST_CASE("load_csv rejects arity and header mismatches") {
    CHECK_THROWS_AS(parse_csv("protocol,dst_port\nTCP\n", csv_schema()), Error);
    CHECK_THROWS_AS(parse_csv("dst_port,protocol\nTCP,80\n", csv_schema()), Error);
}

TEST_CASE("CSV round trip is exact for categoricals and 9+ digits for continuous") {
    Dataset ds;
    ds.schema = csv_schema();
    const double vals[][2] = {{0, 12345.678901234}, {2, 0.000123456789}, {1, 65534.999999}};
    for (const auto& v : vals) ds.push_row(v);
    const auto again = parse_csv(dataset_to_csv(ds), ds.schema);
    REQUIRE(again.rows == ds.rows);
    for (std::size_t r = 0; r < ds.rows; ++r) {
        CHECK(again.cat(r, 0) == ds.cat(r, 0));
        CHECK(again.at(r, 1) == doctest::Approx(ds.at(r, 1)).epsilon(1e-9));
    }
}

TEST_CASE("split is a deterministic disjoint partition") {
    Dataset ds;
    ds.schema = csv_schema();
    for (int i = 0; i < 10; ++i) {
        const double row[2] = {static_cast<double>(i % 3), static_cast<double>(i)};
        ds.push_row(row);
    }
    const auto [train, holdout] = split(ds, 0.2, 7);
    CHECK(train.rows == 8);
    CHECK(holdout.rows == 2);

    // partition: every original row appears exactly once (dst_port is unique)
    std::vector<int> seen(10, 0);
    for (std::size_t r = 0; r < train.rows; ++r) ++seen[static_cast<int>(train.at(r, 1))];
    for (std::size_t r = 0; r < holdout.rows; ++r) ++seen[static_cast<int>(holdout.at(r, 1))];
    for (const int s : seen) CHECK(s == 1);

    const auto [train2, holdout2] = split(ds, 0.2, 7);
    CHECK(dataset_to_csv(train) == dataset_to_csv(train2));
    CHECK(dataset_to_csv(holdout) == dataset_to_csv(holdout2));

    const auto [all, none] = split(ds, 0.0, 3);
    CHECK(all.rows == 10);
    CHECK(none.rows == 0);

    CHECK_THROWS_AS(split(ds, 1.5, 1), Error);
}

TEST_CASE("simulated corpus respects the rule base and the mixture") {
    const auto world = load_world_file(kinetgan::test::data_file("lab.world"));
    const auto kb = load_rules_file(kinetgan::test::data_file("lab.rules"), world.schema);

    const auto corpus = simulate_corpus(world, 1000, 4242);
    REQUIRE(corpus.rows == 1000);
    CHECK(validity_rate(kb, corpus) == 1.0);

    CHECK(simulate_corpus(world, 0, 1).rows == 0);

    // determinism: byte-identical CSV emission
    const auto corpus2 = simulate_corpus(world, 1000, 4242);
    CHECK(dataset_to_csv(corpus) == dataset_to_csv(corpus2));
}

TEST_CASE("simulated mixture matches event probabilities within 3 sigma") {
    kinetgan::test::TempDir tmp("world");
    kinetgan::test::write_file(tmp.path("w.schema"),
                               "column event categorical benign,flood\n"
                               "column x continuous 0 1\n"
                               "label event\n");
    kinetgan::test::write_file(tmp.path("w.world"),
                               "schema w.schema\n"
                               "event benign 0.9\n"
                               "event flood 0.1\n"
                               "sampler benign x norm 0.5 0.1\n"
                               "sampler flood x norm 0.2 0.05\n");
    const auto world = load_world_file(tmp.path("w.world"));
    const auto corpus = simulate_corpus(world, 10000, 99);
    std::size_t floods = 0;
    for (std::size_t r = 0; r < corpus.rows; ++r) floods += corpus.cat(r, 0) == 1 ? 1 : 0;
    // binomial: sigma = sqrt(0.1 * 0.9 / 10000) = 0.003, bound at 3 sigma
    CHECK(std::abs(static_cast<double>(floods) / 10000.0 - 0.1) < 0.01);
}

TEST_CASE("world files are validated against their schema") {
    kinetgan::test::TempDir tmp("worldbad");
    kinetgan::test::write_file(tmp.path("w.schema"),
                               "column event categorical benign,flood\n"
                               "column x continuous 0 1\n"
                               "label event\n");
    // mixture not summing to 1
    kinetgan::test::write_file(tmp.path("bad1.world"),
                               "schema w.schema\nevent benign 0.5\nevent flood 0.1\n"
                               "sampler benign x norm 0.5 0.1\nsampler flood x norm 0.2 0.05\n");
    CHECK_THROWS_AS(load_world_file(tmp.path("bad1.world")), Error);
    // missing sampler for a declared event
    kinetgan::test::write_file(tmp.path("bad2.world"),
                               "schema w.schema\nevent benign 0.9\nevent flood 0.1\n"
                               "sampler benign x norm 0.5 0.1\n");
    CHECK_THROWS_AS(load_world_file(tmp.path("bad2.world")), Error);
    // clip bounds outside the column
    kinetgan::test::write_file(tmp.path("bad3.world"),
                               "schema w.schema\nevent benign 0.9\nevent flood 0.1\n"
                               "sampler benign x norm 0.5 0.1 0 2\n"
                               "sampler flood x norm 0.2 0.05\n");
    CHECK_THROWS_AS(load_world_file(tmp.path("bad3.world")), Error);
}

TEST_CASE("select_columns projects rows and relabels") {
    const auto ds = parse_csv("protocol,dst_port\nTCP,80\nUDP,53\n", csv_schema());
    const auto view = select_columns(ds, {"protocol"}, "protocol");
    CHECK(view.cols() == 1);
    CHECK(view.rows == 2);
    CHECK(view.schema.label == "protocol");
    CHECK_THROWS_AS(select_columns(ds, {"nope"}, ""), Error);
}
