#include <cmath>

#include "doctest.h"
#include "kinetgan/privacy.hpp"
#include "test_support.hpp"

using namespace kinetgan;
using kinetgan::test::toy_corpus;
using kinetgan::test::toy_schema;

namespace {

// Schema with quasi identifiers (protocol, dst_port) and two hidden
// categorical columns (device, zone).
TableSchema attack_schema() {
    return parse_schema(
        "column protocol categorical TCP,UDP\n"
        "column dst_port continuous 0 65535\n"
        "column device categorical cam,plug,hub,phone\n"
        "column zone categorical inside,outside\n"
        "label device\n"
        "conditional protocol\n");
}

Dataset random_attack_data(std::size_t n, Rng& rng, bool device_from_port) {
    Dataset ds;
    ds.schema = attack_schema();
    for (std::size_t i = 0; i < n; ++i) {
        const double port = rng.uniform(0, 65535);
        // with device_from_port, the hidden cells are a function of the port
        const double device = device_from_port
                                  ? std::floor(port / 65535.0 * 3.9999)
                                  : static_cast<double>(rng.uniform_index(4));
        const double zone = device_from_port ? (port > 32768.0 ? 1.0 : 0.0)
                                             : static_cast<double>(rng.uniform_index(2));
        const double row[4] = {static_cast<double>(rng.uniform_index(2)), port, device, zone};
        ds.push_row(row);
    }
    return ds;
}

}  // namespace

TEST_CASE("reident_attack achieves total recovery when synth leaks real rows") {
    Rng rng(1);
    const auto real = random_attack_data(300, rng, true);
    const auto report =
        reident_attack(real, real, 1.0, {"protocol", "dst_port"}, 9);
    CHECK(report.accuracy == 1.0);
    CHECK(report.trials == 300);
    CHECK(report.baseline == doctest::Approx(1.0 / 8).epsilon(1e-12));

    const auto partial = reident_attack(real, real, 0.9, {"protocol", "dst_port"}, 9);
    CHECK(partial.accuracy == 1.0);
    CHECK(partial.trials == 270);
}

TEST_CASE("reident_attack against independent synth sits at the chance level") {
    Rng rng(2);
    const auto real = random_attack_data(400, rng, false);
    const auto synth = random_attack_data(400, rng, false);
    const auto report = reident_attack(real, synth, 0.9, {"protocol", "dst_port"}, 10);
    // chance = 1/4 * 1/2 = 0.125; binomial 3 sigma over 360 trials ~ 0.052
    CHECK(std::abs(report.accuracy - 0.125) < 0.06);
}

TEST_CASE("reident_attack validates its inputs") {
    Rng rng(3);
    const auto real = random_attack_data(50, rng, false);
    CHECK_THROWS_AS(reident_attack(real, real, 0.5, {}, 1), Error);
    CHECK_THROWS_AS(
        reident_attack(real, real, 0.5, {"protocol", "dst_port", "device", "zone"}, 1), Error);
    CHECK_THROWS_AS(reident_attack(real, real, 0.0, {"protocol"}, 1), Error);
    CHECK_THROWS_AS(reident_attack(real, real, 1.5, {"protocol"}, 1), Error);
}

TEST_CASE("reident_attack is deterministic and prefix-nested across overlaps") {
    Rng rng(4);
    const auto real = random_attack_data(500, rng, true);
    const auto synth = random_attack_data(500, rng, true);
    const auto a = reident_attack(real, synth, 0.6, {"protocol", "dst_port"}, 11);
    const auto b = reident_attack(real, synth, 0.6, {"protocol", "dst_port"}, 11);
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.trials == 300);
}

TEST_CASE("attribute_inference learns a deterministic mapping and stays at chance otherwise") {
    Rng rng(5);
    // zone is a threshold function of dst_port in both datasets
    const auto synth = random_attack_data(600, rng, true);
    const auto real = random_attack_data(300, rng, true);
    const auto learnable =
        attribute_inference(real, synth, "zone", {"protocol", "dst_port"}, 21);
    CHECK(learnable.accuracy >= 0.95);
    CHECK(learnable.trials == 300);

    // independent sensitive column: accuracy ~ 1/2 within 3 sigma (~0.09)
    Rng rng2(6);
    const auto synth_ind = random_attack_data(600, rng2, false);
    const auto real_ind = random_attack_data(300, rng2, false);
    const auto chance =
        attribute_inference(real_ind, synth_ind, "zone", {"protocol", "dst_port"}, 22);
    CHECK(std::abs(chance.accuracy - 0.5) < 0.1);
    CHECK(chance.baseline >= 0.5);  // majority-class rate of a binary column

    CHECK_THROWS_AS(attribute_inference(real, synth, "zone", {"zone", "dst_port"}, 1), Error);
    CHECK_THROWS_AS(attribute_inference(real, synth, "missing", {"dst_port"}, 1), Error);
}

TEST_CASE("membership_inference rejects unbalanced or mismatched inputs") {
    Rng rng(7);
    const auto a = random_attack_data(40, rng, false);
    const auto b = random_attack_data(41, rng, false);
    CHECK_THROWS_AS(
        membership_inference(nullptr, &a, a, b, MiaMode::FullyBlackBox, 1), Error);
    const auto c = random_attack_data(40, rng, false);
    CHECK_THROWS_AS(membership_inference(nullptr, nullptr, a, c, MiaMode::FullyBlackBox, 1),
                    Error);
    CHECK_THROWS_AS(membership_inference(nullptr, &a, a, c, MiaMode::WhiteBox, 1), Error);
}

TEST_CASE("black-box membership inference is calibrated and detects memorization") {
    Rng rng(8);
    // candidates drawn from one pool; synth independent of both
    const auto members = random_attack_data(120, rng, true);
    const auto nonmembers = random_attack_data(120, rng, true);
    const auto independent = random_attack_data(500, rng, true);

    const auto calibrated = membership_inference(nullptr, &independent, members, nonmembers,
                                                 MiaMode::FullyBlackBox, 31);
    CHECK(std::abs(calibrated.accuracy - 0.5) <= 0.1);
    CHECK(calibrated.baseline == 0.5);
    CHECK(calibrated.trials == 240);

    // a memorizing generator: synthetic data contains exact copies of members
    Dataset memorizing = independent;
    for (std::size_t r = 0; r < members.rows; ++r) memorizing.push_row(members.row(r));
    const auto leaky = membership_inference(nullptr, &memorizing, members, nonmembers,
                                            MiaMode::FullyBlackBox, 31);
    CHECK(leaky.accuracy > calibrated.accuracy);
    CHECK(leaky.accuracy > 0.9);  // every member is at distance zero
}

TEST_CASE("white-box membership inference runs against a model") {
    const auto schema = toy_schema();
    const auto kb = load_rules("", schema);
    Hyper hy;
    hy.batch = 16;
    hy.hidden = 24;
    hy.z_dim = 8;
    hy.epochs = 2;
    hy.eval_sample = 16;
    auto model = init_model(schema, kb, hy, 70);
    const auto data = toy_corpus(10);
    Rng rng(71);
    train(model, data, rng);

    const auto members = toy_corpus(5);
    const auto nonmembers = toy_corpus(5);
    const auto report =
        membership_inference(&model, nullptr, members, nonmembers, MiaMode::WhiteBox, 3);
    CHECK(report.accuracy >= 0.0);
    CHECK(report.accuracy <= 1.0);
    CHECK(report.baseline == 0.5);
    CHECK(report.trials == members.rows + nonmembers.rows);
}

TEST_CASE("default quasi columns cover conditionals and protocol/port columns") {
    const auto schema = parse_schema(
        "column event categorical a,b\n"
        "column protocol categorical TCP,UDP\n"
        "column src_ip categorical x,y\n"
        "column dst_port continuous 0 65535\n"
        "label event\n"
        "conditional event\n");
    const auto quasi = default_quasi_columns(schema);
    REQUIRE(quasi.size() == 3);
    CHECK(quasi[0] == "event");
    CHECK(quasi[1] == "protocol");
    CHECK(quasi[2] == "dst_port");
}

TEST_CASE("attack reports serialize with accuracy, baseline and trials") {
    Rng rng(9);
    const auto real = random_attack_data(100, rng, true);
    const auto report = reident_attack(real, real, 0.5, {"protocol", "dst_port"}, 2);
    const auto j = report.to_json();
    CHECK(j["attack"] == "reident");
    CHECK(j["accuracy"].get<double>() >= 0.0);
    CHECK(j["baseline"].get<double>() > 0.0);
    CHECK(j["trials"].get<std::size_t>() == 50);
    CHECK(j["params"].contains("overlap"));
}
