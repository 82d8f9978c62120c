#include "kinetgan/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include "kinetgan/rng.hpp"

namespace kinetgan {

namespace {
constexpr double kClampEps = 1e-7;
}

void matmul(const Matrix& x, const Matrix& w, Matrix& out) {
    if (x.cols != w.rows) throw Error("matmul: inner dimension mismatch");
    out = Matrix(x.rows, w.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xrow = x.row(i);
        double* orow = out.row(i);
        for (std::size_t k = 0; k < x.cols; ++k) {
            const double v = xrow[k];
            if (v == 0.0) continue;  // encoded rows are mostly one-hot zeros
            const double* wrow = w.row(k);
            for (std::size_t j = 0; j < w.cols; ++j) orow[j] += v * wrow[j];
        }
    }
}

void matmul_at_b(const Matrix& x, const Matrix& dy, Matrix& out) {
    if (x.rows != dy.rows) throw Error("matmul_at_b: row count mismatch");
    out = Matrix(x.cols, dy.cols);
    for (std::size_t b = 0; b < x.rows; ++b) {
        const double* xrow = x.row(b);
        const double* drow = dy.row(b);
        for (std::size_t i = 0; i < x.cols; ++i) {
            const double v = xrow[i];
            if (v == 0.0) continue;
            double* orow = out.row(i);
            for (std::size_t j = 0; j < dy.cols; ++j) orow[j] += v * drow[j];
        }
    }
}

void matmul_a_bt(const Matrix& dy, const Matrix& w, Matrix& out) {
    if (dy.cols != w.cols) throw Error("matmul_a_bt: column count mismatch");
    out = Matrix(dy.rows, w.rows);
    for (std::size_t i = 0; i < dy.rows; ++i) {
        const double* drow = dy.row(i);
        double* orow = out.row(i);
        for (std::size_t p = 0; p < w.rows; ++p) {
            const double* wrow = w.row(p);
            double acc = 0.0;
            for (std::size_t j = 0; j < dy.cols; ++j) acc += drow[j] * wrow[j];
            orow[p] = acc;
        }
    }
}

std::size_t DenseNet::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.a.size() + l.b.size();
    return n;
}

namespace {

void validate_head(const ActSpec& act, std::size_t dim) {
    if (act.kind != Act::BlockSoftmax) return;
    std::size_t total = 0;
    for (const auto& seg : act.head) {
        if (seg.len == 0) throw Error("block-softmax segment of length zero");
        total += seg.len;
    }
    if (total != dim)
        throw Error("block-softmax layout covers " + std::to_string(total) +
                    " outputs, layer has " + std::to_string(dim));
}

void apply_activation(const ActSpec& act, Matrix& z) {
    switch (act.kind) {
        case Act::Identity:
            return;
        case Act::Relu:
            for (auto& v : z.a) v = v > 0.0 ? v : 0.0;
            return;
        case Act::Sigmoid:
            for (auto& v : z.a) v = 1.0 / (1.0 + std::exp(-v));
            return;
        case Act::BlockSoftmax:
            for (std::size_t r = 0; r < z.rows; ++r) {
                double* row = z.row(r);
                std::size_t off = 0;
                for (const auto& seg : act.head) {
                    if (!seg.softmax) {
                        for (std::size_t i = 0; i < seg.len; ++i)
                            row[off + i] = 1.0 / (1.0 + std::exp(-row[off + i]));
                    } else {
                        double mx = row[off];
                        for (std::size_t i = 1; i < seg.len; ++i) mx = std::max(mx, row[off + i]);
                        double sum = 0.0;
                        for (std::size_t i = 0; i < seg.len; ++i) {
                            row[off + i] = std::exp(row[off + i] - mx);
                            sum += row[off + i];
                        }
                        for (std::size_t i = 0; i < seg.len; ++i) row[off + i] /= sum;
                    }
                    off += seg.len;
                }
            }
            return;
    }
}

// Converts da (gradient w.r.t. activation output) into dz in place, given the
// post-activation values.
void activation_backward(const ActSpec& act, const Matrix& a, Matrix& da) {
    switch (act.kind) {
        case Act::Identity:
            return;
        case Act::Relu:
            for (std::size_t i = 0; i < da.a.size(); ++i) {
                if (a.a[i] <= 0.0) da.a[i] = 0.0;
            }
            return;
        case Act::Sigmoid:
            for (std::size_t i = 0; i < da.a.size(); ++i) {
                da.a[i] *= a.a[i] * (1.0 - a.a[i]);
            }
            return;
        case Act::BlockSoftmax:
            for (std::size_t r = 0; r < da.rows; ++r) {
                const double* arow = a.row(r);
                double* drow = da.row(r);
                std::size_t off = 0;
                for (const auto& seg : act.head) {
                    if (!seg.softmax) {
                        for (std::size_t i = 0; i < seg.len; ++i) {
                            const double y = arow[off + i];
                            drow[off + i] *= y * (1.0 - y);
                        }
                    } else {
                        double dot = 0.0;
                        for (std::size_t i = 0; i < seg.len; ++i)
                            dot += drow[off + i] * arow[off + i];
                        for (std::size_t i = 0; i < seg.len; ++i) {
                            const double y = arow[off + i];
                            drow[off + i] = y * (drow[off + i] - dot);
                        }
                    }
                    off += seg.len;
                }
            }
            return;
    }
}

}  // namespace

DenseNet init_net(const std::vector<std::size_t>& layer_dims,
                  const std::vector<ActSpec>& activations, std::uint64_t seed) {
    if (layer_dims.size() < 2) throw Error("init_net: need at least one layer");
    if (activations.size() != layer_dims.size() - 1)
        throw Error("init_net: one activation per layer required");
    for (const auto d : layer_dims) {
        if (d == 0) throw Error("init_net: zero layer dimension");
    }

    DenseNet net;
    net.in_dim = layer_dims[0];
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        Layer layer;
        const std::size_t in = layer_dims[l], out = layer_dims[l + 1];
        validate_head(activations[l], out);
        layer.w = Matrix(in, out);
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (auto& v : layer.w.a) v = rng.uniform(-limit, limit);
        layer.b.assign(out, 0.0);
        layer.act = activations[l];
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Matrix forward(const DenseNet& net, const Matrix& batch, ForwardCache* cache) {
    if (batch.cols != net.in_dim)
        throw Error("forward: batch width " + std::to_string(batch.cols) + ", net expects " +
                    std::to_string(net.in_dim));
    if (cache) {
        cache->acts.clear();
        cache->acts.push_back(batch);
    }
    Matrix cur = batch;
    for (const auto& layer : net.layers) {
        Matrix z;
        matmul(cur, layer.w, z);
        for (std::size_t r = 0; r < z.rows; ++r) {
            double* row = z.row(r);
            for (std::size_t j = 0; j < z.cols; ++j) row[j] += layer.b[j];
        }
        apply_activation(layer.act, z);
        cur = std::move(z);
        if (cache) cache->acts.push_back(cur);
    }
    return cur;
}

Grads backward(const DenseNet& net, const ForwardCache& cache, const Matrix& dout) {
    const std::size_t L = net.layers.size();
    if (cache.acts.size() != L + 1) throw Error("backward: stale or missing forward cache");
    if (dout.rows != cache.acts.back().rows || dout.cols != cache.acts.back().cols)
        throw Error("backward: loss gradient shape mismatch");

    Grads g;
    g.dw.resize(L);
    g.db.resize(L);

    Matrix da = dout;
    for (std::size_t l = L; l-- > 0;) {
        const auto& layer = net.layers[l];
        activation_backward(layer.act, cache.acts[l + 1], da);  // da is now dz
        g.db[l].assign(layer.b.size(), 0.0);
        for (std::size_t r = 0; r < da.rows; ++r) {
            const double* drow = da.row(r);
            for (std::size_t j = 0; j < da.cols; ++j) g.db[l][j] += drow[j];
        }
        matmul_at_b(cache.acts[l], da, g.dw[l]);
        Matrix dprev;
        matmul_a_bt(da, layer.w, dprev);
        da = std::move(dprev);
    }
    g.dinput = std::move(da);
    return g;
}

LossResult bce_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows != target.rows || pred.cols != target.cols)
        throw Error("bce_loss: shape mismatch");
    LossResult r;
    r.grad = Matrix(pred.rows, pred.cols);
    const double n = static_cast<double>(pred.a.size());
    for (std::size_t i = 0; i < pred.a.size(); ++i) {
        const double p = std::clamp(pred.a[i], kClampEps, 1.0 - kClampEps);
        const double t = target.a[i];
        r.value += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
        r.grad.a[i] = (p - t) / (p * (1.0 - p)) / n;
    }
    r.value /= n;
    return r;
}

LossResult cross_entropy_loss(const Matrix& probs, const Matrix& target_onehot) {
    if (probs.rows != target_onehot.rows || probs.cols != target_onehot.cols)
        throw Error("cross_entropy_loss: shape mismatch");
    LossResult r;
    r.grad = Matrix(probs.rows, probs.cols);
    const double n = static_cast<double>(probs.rows);
    for (std::size_t i = 0; i < probs.a.size(); ++i) {
        const double t = target_onehot.a[i];
        if (t == 0.0) continue;
        const double p = std::clamp(probs.a[i], kClampEps, 1.0 - kClampEps);
        r.value += -t * std::log(p);
        r.grad.a[i] = -t / p / n;
    }
    r.value /= n;
    return r;
}

AdamState make_adam(const DenseNet& net, const AdamConfig& cfg) {
    AdamState s;
    s.cfg = cfg;
    for (const auto& layer : net.layers) {
        s.mw.emplace_back(layer.w.rows, layer.w.cols);
        s.vw.emplace_back(layer.w.rows, layer.w.cols);
        s.mb.emplace_back(layer.b.size(), 0.0);
        s.vb.emplace_back(layer.b.size(), 0.0);
    }
    return s;
}

namespace {

void adam_update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                 std::vector<double>& v, const AdamConfig& cfg, double bc1, double bc2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double mh = m[i] / bc1;
        const double vh = v[i] / bc2;
        p[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
    }
}

}  // namespace

void adam_step(DenseNet& net, const Grads& grads, AdamState& state) {
    if (grads.dw.size() != net.layers.size()) throw Error("adam_step: gradient shape mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        if (grads.dw[l].a.size() != net.layers[l].w.a.size() ||
            grads.db[l].size() != net.layers[l].b.size())
            throw Error("adam_step: gradient shape mismatch");
        adam_update(net.layers[l].w.a, grads.dw[l].a, state.mw[l].a, state.vw[l].a, state.cfg,
                    bc1, bc2);
        adam_update(net.layers[l].b, grads.db[l], state.mb[l], state.vb[l], state.cfg, bc1, bc2);
    }
}

void sgd_step(DenseNet& net, const Grads& grads, double lr) {
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& layer = net.layers[l];
        for (std::size_t i = 0; i < layer.w.a.size(); ++i) layer.w.a[i] -= lr * grads.dw[l].a[i];
        for (std::size_t i = 0; i < layer.b.size(); ++i) layer.b[i] -= lr * grads.db[l][i];
    }
}

double grad_check(const DenseNet& net, const Matrix& batch, const LossFn& loss, double h,
                  std::uint64_t sample_seed) {
    if (!(h >= 1e-7 && h <= 1e-3)) throw Error("grad_check: h must lie in [1e-7, 1e-3]");

    DenseNet work = net;
    ForwardCache cache;
    const Matrix out = forward(work, batch, &cache);
    const LossResult base = loss(out);
    const Grads analytic = backward(work, cache, base.grad);

    const std::size_t total = work.param_count();
    std::vector<std::size_t> indices(total);
    std::iota(indices.begin(), indices.end(), 0);
    constexpr std::size_t kSubsampleThreshold = 10000;
    constexpr std::size_t kSubsampleSize = 4000;
    if (total > kSubsampleThreshold) {
        Rng rng(sample_seed);
        for (std::size_t i = 0; i < kSubsampleSize; ++i) {
            std::swap(indices[i], indices[i + rng.uniform_index(total - i)]);
        }
        indices.resize(kSubsampleSize);
    }

    // Flat parameter order: per layer, weight entries then bias entries.
    auto locate = [&](std::size_t flat) -> std::pair<double*, double> {
        std::size_t pos = flat;
        for (std::size_t l = 0; l < work.layers.size(); ++l) {
            auto& layer = work.layers[l];
            if (pos < layer.w.a.size())
                return {&layer.w.a[pos], analytic.dw[l].a[pos]};
            pos -= layer.w.a.size();
            if (pos < layer.b.size())
                return {&layer.b[pos], analytic.db[l][pos]};
            pos -= layer.b.size();
        }
        throw Error("grad_check: parameter index out of range");
    };

    // Central differences are invalid when a relu unit flips inside the +-h
    // window; those parameters sit on a kink and are skipped.
    auto relu_masks_differ = [&](const ForwardCache& a, const ForwardCache& b) {
        for (std::size_t l = 0; l < work.layers.size(); ++l) {
            if (work.layers[l].act.kind != Act::Relu) continue;
            const auto& xa = a.acts[l + 1].a;
            const auto& xb = b.acts[l + 1].a;
            for (std::size_t i = 0; i < xa.size(); ++i) {
                if ((xa[i] > 0.0) != (xb[i] > 0.0)) return true;
            }
        }
        return false;
    };

    double max_rel = 0.0;
    for (const std::size_t flat : indices) {
        auto [p, g_analytic] = locate(flat);
        const double saved = *p;
        ForwardCache plus_cache, minus_cache;
        *p = saved + h;
        const double f_plus = loss(forward(work, batch, &plus_cache)).value;
        *p = saved - h;
        const double f_minus = loss(forward(work, batch, &minus_cache)).value;
        *p = saved;
        if (relu_masks_differ(plus_cache, minus_cache)) continue;
        const double g_numeric = (f_plus - f_minus) / (2.0 * h);
        // The absolute floor keeps finite-difference noise (~1e-9 at h=1e-5 in
        // double precision) from dominating near-zero gradients.
        const double denom = std::max({std::abs(g_analytic), std::abs(g_numeric), 1e-5});
        max_rel = std::max(max_rel, std::abs(g_analytic - g_numeric) / denom);
    }
    return max_rel;
}

void save_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
    out << "mat " << name << ' ' << m.rows << ' ' << m.cols << '\n';
    char buf[40];
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.row(r);
        for (std::size_t c = 0; c < m.cols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
            out << buf << (c + 1 == m.cols ? '\n' : ' ');
        }
    }
}

Matrix read_matrix(std::istream& in, const std::string& expected_name) {
    std::string tag, name;
    std::size_t rows = 0, cols = 0;
    if (!(in >> tag >> name >> rows >> cols) || tag != "mat")
        throw Error("checkpoint: expected 'mat " + expected_name + "' header");
    if (name != expected_name)
        throw Error("checkpoint: expected matrix '" + expected_name + "', found '" + name + "'");
    Matrix m(rows, cols);
    for (auto& v : m.a) {
        if (!(in >> v)) throw Error("checkpoint: truncated matrix '" + name + "'");
    }
    return m;
}

}  // namespace kinetgan
