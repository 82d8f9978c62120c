#include <cmath>
#include <sstream>

#include "doctest.h"
#include "kinetgan/neuralnet.hpp"
#include "kinetgan/rng.hpp"

using namespace kinetgan;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, bool unit = false) {
    Matrix m(rows, cols);
    for (auto& v : m.a) v = unit ? rng.uniform01() : rng.normal();
    return m;
}

}  // namespace

TEST_CASE("init_net shapes, parameter count and determinism") {
    const auto net = init_net({4, 8, 1}, {ActSpec::relu(), ActSpec::sigmoid()}, 7);
    CHECK(net.param_count() == 49);  // 4*8+8 + 8*1+1
    CHECK(net.in_dim == 4);
    CHECK(net.out_dim() == 1);

    const auto again = init_net({4, 8, 1}, {ActSpec::relu(), ActSpec::sigmoid()}, 7);
    CHECK(net.layers[0].w.a == again.layers[0].w.a);
    const auto other = init_net({4, 8, 1}, {ActSpec::relu(), ActSpec::sigmoid()}, 8);
    CHECK(net.layers[0].w.a != other.layers[0].w.a);

    // Glorot bound
    const double limit = std::sqrt(6.0 / 12.0);
    for (const double v : net.layers[0].w.a) CHECK(std::abs(v) <= limit);
    for (const double b : net.layers[0].b) CHECK(b == 0.0);

    // block-softmax layout must cover the layer width
    CHECK_THROWS_AS(init_net({4, 5}, {ActSpec::block_softmax({{3, true}})}, 1), Error);
    CHECK_THROWS_AS(init_net({4}, {}, 1), Error);
}

TEST_CASE("forward computes the documented closed forms") {
    Rng rng(3);

    // all-zero weights with a sigmoid head: every output 0.5
    auto net = init_net({3, 2}, {ActSpec::sigmoid()}, 1);
    for (auto& v : net.layers[0].w.a) v = 0.0;
    const auto out = forward(net, random_matrix(4, 3, rng));
    for (const double v : out.a) CHECK(v == 0.5);

    // identity activation with identity weights passes the input through
    auto id = init_net({3, 3}, {ActSpec::identity()}, 1);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) id.layers[0].w.at(i, j) = i == j ? 1.0 : 0.0;
    const auto x = random_matrix(5, 3, rng);
    CHECK(forward(id, x).a == x.a);

    // batch width mismatch
    CHECK_THROWS_AS(forward(net, random_matrix(2, 7, rng)), Error);
}

TEST_CASE("block-softmax head emits per-block simplexes and sigmoid slots") {
    const auto net = init_net(
        {6, 6}, {ActSpec::block_softmax({{3, true}, {1, false}, {2, true}})}, 11);
    Rng rng(4);
    const auto out = forward(net, random_matrix(8, 6, rng));
    for (std::size_t r = 0; r < out.rows; ++r) {
        const double* row = out.row(r);
        CHECK(row[0] + row[1] + row[2] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(row[4] + row[5] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(row[3] > 0.0);
        CHECK(row[3] < 1.0);
        for (std::size_t j = 0; j < 6; ++j) CHECK(row[j] >= 0.0);
    }
}

TEST_CASE("bce_loss values and gradient") {
    Matrix pred(1, 2), target(1, 2);
    pred.a = {1.0, 1.0};
    target.a = {1.0, 1.0};
    CHECK(bce_loss(pred, target).value <= 2e-7);

    pred.a = {0.5, 0.5};
    target.a = {1.0, 1.0};
    CHECK(bce_loss(pred, target).value == doctest::Approx(0.6931).epsilon(1e-4));

    // gradient vs central differences
    Rng rng(5);
    Matrix p(3, 4), t(3, 4);
    for (auto& v : p.a) v = 0.05 + 0.9 * rng.uniform01();
    for (auto& v : t.a) v = rng.uniform01() > 0.5 ? 1.0 : 0.0;
    const auto base = bce_loss(p, t);
    const double h = 1e-5;
    for (std::size_t i = 0; i < p.a.size(); ++i) {
        Matrix plus = p, minus = p;
        plus.a[i] += h;
        minus.a[i] -= h;
        const double numeric = (bce_loss(plus, t).value - bce_loss(minus, t).value) / (2 * h);
        CHECK(std::abs(numeric - base.grad.a[i]) / std::max(1.0, std::abs(numeric)) < 1e-6);
    }

    Matrix wrong(2, 2);
    CHECK_THROWS_AS(bce_loss(p, wrong), Error);
}

TEST_CASE("backward matches finite differences on a random stack") {
    Rng rng(21);
    const auto net = init_net({5, 7, 3}, {ActSpec::relu(), ActSpec::sigmoid()}, 99);
    const auto batch = random_matrix(16, 5, rng);
    Matrix target(16, 3);
    for (auto& v : target.a) v = rng.uniform01() > 0.5 ? 1.0 : 0.0;
    const auto loss = [&](const Matrix& out) { return bce_loss(out, target); };
    CHECK(grad_check(net, batch, loss, 1e-5) < 1e-4);

    CHECK_THROWS_AS(grad_check(net, batch, loss, 1e-2), Error);
    CHECK_THROWS_AS(grad_check(net, batch, loss, 1e-8), Error);
}

TEST_CASE("a corrupted backward pass is caught by finite differences") {
    Rng rng(22);
    const auto net = init_net({4, 6, 2}, {ActSpec::relu(), ActSpec::sigmoid()}, 17);
    const auto batch = random_matrix(8, 4, rng);
    Matrix target(8, 2);
    for (auto& v : target.a) v = 1.0;
    const auto loss = [&](const Matrix& out) { return bce_loss(out, target); };

    ForwardCache cache;
    const auto out = forward(net, batch, &cache);
    auto grads = backward(net, cache, loss(out).grad);
    for (auto& v : grads.dw[0].a) v *= 1.5;  // corruption under test

    // finite differences over the corrupted first layer
    DenseNet work = net;
    double max_rel = 0.0;
    const double h = 1e-5;
    for (std::size_t i = 0; i < work.layers[0].w.a.size(); ++i) {
        const double saved = work.layers[0].w.a[i];
        work.layers[0].w.a[i] = saved + h;
        const double fp = loss(forward(work, batch)).value;
        work.layers[0].w.a[i] = saved - h;
        const double fm = loss(forward(work, batch)).value;
        work.layers[0].w.a[i] = saved;
        const double numeric = (fp - fm) / (2 * h);
        const double analytic = grads.dw[0].a[i];
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-5});
        max_rel = std::max(max_rel, std::abs(numeric - analytic) / denom);
    }
    CHECK(max_rel > 1e-2);
}

TEST_CASE("backward closed forms on degenerate cases") {
    Rng rng(30);
    const auto net = init_net({4, 3}, {ActSpec::identity()}, 5);
    const auto batch = random_matrix(6, 4, rng);
    ForwardCache cache;
    forward(net, batch, &cache);

    // zero loss gradient -> zero parameter gradients
    Matrix zero(6, 3);
    const auto g0 = backward(net, cache, zero);
    for (const double v : g0.dw[0].a) CHECK(v == 0.0);
    for (const double v : g0.db[0]) CHECK(v == 0.0);
    for (const double v : g0.dinput.a) CHECK(v == 0.0);

    // identity single layer: input gradient is dout * W^T
    const auto dout = random_matrix(6, 3, rng);
    const auto g = backward(net, cache, dout);
    Matrix expected;
    matmul_a_bt(dout, net.layers[0].w, expected);
    for (std::size_t i = 0; i < expected.a.size(); ++i)
        CHECK(g.dinput.a[i] == doctest::Approx(expected.a[i]).epsilon(1e-12));

    // stale cache is rejected
    ForwardCache bad;
    CHECK_THROWS_AS(backward(net, bad, dout), Error);
}

TEST_CASE("adam_step behaviour") {
    // lr = 0 leaves parameters unchanged
    auto net = init_net({2, 2}, {ActSpec::identity()}, 3);
    const auto before = net.layers[0].w.a;
    auto state = make_adam(net, {0.0, 0.5, 0.9, 1e-8});
    Grads g;
    g.dw.emplace_back(2, 2);
    g.db.emplace_back(std::vector<double>(2, 1.0));
    for (auto& v : g.dw[0].a) v = 1.0;
    adam_step(net, g, state);
    CHECK(net.layers[0].w.a == before);

    // first-step magnitude is ~lr for every nonzero gradient
    auto net2 = init_net({2, 2}, {ActSpec::identity()}, 3);
    const auto start = net2.layers[0].w.a;
    auto state2 = make_adam(net2, {0.01, 0.5, 0.9, 1e-8});
    Grads g2;
    g2.dw.emplace_back(2, 2);
    g2.db.emplace_back(std::vector<double>(2, 0.0));
    g2.dw[0].a = {0.3, -2.0, 0.001, 5.0};
    adam_step(net2, g2, state2);
    for (std::size_t i = 0; i < 4; ++i) {
        const double step = std::abs(net2.layers[0].w.a[i] - start[i]);
        CHECK(step <= 0.01 + 1e-12);
        CHECK(step >= 0.0099);
    }

    // scalar quadratic f(w) = w^2 shrinks monotonically from w = 1
    DenseNet scalar;
    scalar.in_dim = 1;
    scalar.layers.push_back({Matrix(1, 1), {0.0}, ActSpec::identity()});
    scalar.layers[0].w.a[0] = 1.0;
    auto st = make_adam(scalar, {0.1, 0.5, 0.9, 1e-8});
    double prev = 1.0;
    for (int i = 0; i < 10; ++i) {
        Grads gq;
        gq.dw.emplace_back(1, 1);
        gq.db.emplace_back(std::vector<double>(1, 0.0));
        gq.dw[0].a[0] = 2.0 * scalar.layers[0].w.a[0];
        adam_step(scalar, gq, st);
        const double cur = std::abs(scalar.layers[0].w.a[0]);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("matrix fragments round trip bit-exactly") {
    Rng rng(40);
    const auto m = random_matrix(3, 5, rng);
    std::ostringstream out;
    save_matrix(out, "w0", m);
    std::istringstream in(out.str());
    const auto back = read_matrix(in, "w0");
    CHECK(back.rows == 3);
    CHECK(back.cols == 5);
    CHECK(back.a == m.a);

    std::istringstream wrong(out.str());
    CHECK_THROWS_AS(read_matrix(wrong, "b0"), Error);
}
