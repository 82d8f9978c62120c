#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "kinetgan/error.hpp"

namespace kinetgan {

// Dense row-major matrix of doubles. All kernels are single-threaded and
// fixed-order so results are bit-reproducible for fixed inputs.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
    double* row(std::size_t r) { return a.data() + r * cols; }
    const double* row(std::size_t r) const { return a.data() + r * cols; }
};

void matmul(const Matrix& x, const Matrix& w, Matrix& out);       // out = x * w
void matmul_at_b(const Matrix& x, const Matrix& dy, Matrix& out); // out = x^T * dy
void matmul_a_bt(const Matrix& dy, const Matrix& w, Matrix& out); // out = dy * w^T

enum class Act { Relu, Sigmoid, Identity, BlockSoftmax };

// BlockSoftmax layout segment: softmax over `len` entries when softmax is
// set, otherwise an elementwise sigmoid slot (used for continuous cells,
// always len 1 in practice).
struct HeadSegment {
    std::size_t len = 0;
    bool softmax = true;
};

struct ActSpec {
    Act kind = Act::Identity;
    std::vector<HeadSegment> head;  // BlockSoftmax only

    static ActSpec relu() { return {Act::Relu, {}}; }
    static ActSpec sigmoid() { return {Act::Sigmoid, {}}; }
    static ActSpec identity() { return {Act::Identity, {}}; }
    static ActSpec block_softmax(std::vector<HeadSegment> head) {
        return {Act::BlockSoftmax, std::move(head)};
    }
};

struct Layer {
    Matrix w;  // in x out
    std::vector<double> b;
    ActSpec act;
};

struct DenseNet {
    std::size_t in_dim = 0;
    std::vector<Layer> layers;

    std::size_t out_dim() const { return layers.back().w.cols; }
    std::size_t param_count() const;
};

// Glorot-uniform weights, zero biases, deterministic for a fixed seed.
// layer_dims is [in, h1, ..., out]; activations has one entry per layer.
DenseNet init_net(const std::vector<std::size_t>& layer_dims,
                  const std::vector<ActSpec>& activations, std::uint64_t seed);

struct ForwardCache {
    std::vector<Matrix> acts;  // acts[0] = input, acts[L] = output
};

Matrix forward(const DenseNet& net, const Matrix& batch, ForwardCache* cache = nullptr);

struct Grads {
    std::vector<Matrix> dw;
    std::vector<std::vector<double>> db;
    Matrix dinput;
};

// Exact reverse-mode gradients for all parameters and the input, given the
// cache of the forward pass and the loss gradient w.r.t. the output.
Grads backward(const DenseNet& net, const ForwardCache& cache, const Matrix& dout);

struct LossResult {
    double value = 0.0;
    Matrix grad;  // w.r.t. predictions
};

// Mean binary cross entropy over all entries; predictions clamped to
// [1e-7, 1 - 1e-7].
LossResult bce_loss(const Matrix& pred, const Matrix& target);

// Mean negative log-likelihood over rows for simplex predictions against
// one-hot targets.
LossResult cross_entropy_loss(const Matrix& probs, const Matrix& target_onehot);

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    std::size_t step = 0;
    std::vector<Matrix> mw, vw;
    std::vector<std::vector<double>> mb, vb;
};

AdamState make_adam(const DenseNet& net, const AdamConfig& cfg);
void adam_step(DenseNet& net, const Grads& grads, AdamState& state);

// Plain gradient descent update (used by the convex classifier).
void sgd_step(DenseNet& net, const Grads& grads, double lr);

using LossFn = std::function<LossResult(const Matrix& out)>;

// Max relative error between analytic gradients and central finite
// differences. h must lie in [1e-7, 1e-3]. Nets above 10^4 parameters are
// verified on a seeded 4000-parameter subsample.
double grad_check(const DenseNet& net, const Matrix& batch, const LossFn& loss, double h,
                  std::uint64_t sample_seed = 17);

// Checkpoint fragments: "mat <name> <rows> <cols>" then row-major values at
// 17 significant digits (bit-exact round trip for doubles).
void save_matrix(std::ostream& out, const std::string& name, const Matrix& m);
Matrix read_matrix(std::istream& in, const std::string& expected_name);

}  // namespace kinetgan
