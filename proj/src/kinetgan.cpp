#include "kinetgan/kinetgan.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "parse_util.hpp"

namespace kinetgan {

using detail::parse_double;
using detail::parse_u64;
using detail::split_ws;

namespace {

constexpr double kScoreEps = 1e-7;

std::vector<HeadSegment> row_head_layout(const Encoder& enc) {
    std::vector<HeadSegment> head;
    for (std::size_t c = 0; c < enc.schema().columns.size(); ++c) {
        const bool categorical = enc.schema().columns[c].is_categorical();
        head.push_back({enc.block_width(c), categorical});
    }
    return head;
}

}  // namespace

void validate_hyper(const Hyper& hyper) {
    if (hyper.batch == 0 || hyper.z_dim == 0 || hyper.hidden == 0)
        throw Error("hyper: sizes must be positive");
    if (hyper.lambda_cond < 0.0) throw Error("hyper: lambda_cond must be >= 0");
    if (hyper.match_retries == 0) throw Error("hyper: match_retries must be positive");
    if (hyper.eval_sample == 0) throw Error("hyper: eval_sample must be positive");
}

GanModel init_model(const TableSchema& schema, const KnowledgeBase& kb, const Hyper& hyper,
                    std::uint64_t seed) {
    validate_schema(schema);
    validate_hyper(hyper);
    if (schema.conditional.empty())
        throw Error("init_model: schema needs a non-empty conditional list");
    if (!schema_equal(schema, kb.schema))
        throw Error("init_model: knowledge base is bound to a different schema");

    const Encoder enc(schema);
    const std::size_t w = enc.row_width();
    const std::size_t cb = enc.cond_width();
    const Rng root(seed);

    GanModel m;
    m.schema = schema;
    m.kb = kb;
    m.hyper = hyper;
    m.seed = seed;
    m.generator = init_net(
        {hyper.z_dim + cb, hyper.hidden, hyper.hidden, w},
        {ActSpec::relu(), ActSpec::relu(), ActSpec::block_softmax(row_head_layout(enc))},
        root.fork("init-gen").seed());
    m.disc_data = init_net({w + cb, hyper.hidden, hyper.hidden, 1},
                           {ActSpec::relu(), ActSpec::relu(), ActSpec::sigmoid()},
                           root.fork("init-dm").seed());
    m.disc_kg = init_net({w + cb, hyper.hidden, hyper.hidden, 1},
                         {ActSpec::relu(), ActSpec::relu(), ActSpec::sigmoid()},
                         root.fork("init-dkg").seed());
    return m;
}

RealMatcher::RealMatcher(const Dataset& data, const Encoder& enc) {
    std::vector<int> key(enc.n_conditional());
    for (std::size_t r = 0; r < data.rows; ++r) {
        for (std::size_t k = 0; k < enc.n_conditional(); ++k) {
            key[k] = data.cat(r, enc.conditional_column(k));
        }
        buckets_[key].push_back(static_cast<std::uint32_t>(r));
    }
}

const std::vector<std::uint32_t>* RealMatcher::rows(const std::vector<int>& assignment) const {
    const auto it = buckets_.find(assignment);
    return it == buckets_.end() ? nullptr : &it->second;
}

namespace {

const Dataset& checked_training_data(const GanModel& model, const Dataset& data) {
    if (!schema_equal(model.schema, data.schema))
        throw Error("training data schema does not match the model");
    if (data.rows == 0) throw Error("training data is empty");
    return data;
}

}  // namespace

Trainer::Trainer(GanModel& model, const Dataset& train_data)
    : model_(model),
      data_(checked_training_data(model, train_data)),
      enc_(model.schema),
      matcher_(data_, enc_),
      adam_g_(make_adam(model.generator, model.hyper.adam_g)),
      adam_dm_(make_adam(model.disc_data, model.hyper.adam_dm)),
      adam_dkg_(make_adam(model.disc_kg, model.hyper.adam_dkg)) {
    steps_per_epoch_ = (data_.rows + model.hyper.batch - 1) / model.hyper.batch;
}

StepMetrics Trainer::step(Rng& rng) {
    const Hyper& hy = model_.hyper;
    const std::size_t B = hy.batch;
    const std::size_t W = enc_.row_width();
    const std::size_t CB = enc_.cond_width();

    // 1-2. Per-slot condition, redrawn until a matching real row exists.
    std::vector<ConditionVector> conds;
    conds.reserve(B);
    std::vector<std::uint32_t> real_rows(B);
    for (std::size_t b = 0; b < B; ++b) {
        bool found = false;
        for (std::size_t attempt = 0; attempt < hy.match_retries; ++attempt) {
            ConditionVector cv = enc_.sample_condition(rng);
            const auto* bucket = matcher_.rows(cv.assignment);
            if (bucket) {
                real_rows[b] = (*bucket)[rng.uniform_index(bucket->size())];
                conds.push_back(std::move(cv));
                found = true;
                break;
            }
        }
        if (!found)
            throw Error("sampler starvation: no real row matches any resampled condition");
    }

    Matrix bits(B, CB);
    for (std::size_t b = 0; b < B; ++b) {
        std::copy(conds[b].bits.begin(), conds[b].bits.end(), bits.row(b));
    }

    // 3. Fake rows from noise + condition bits.
    Matrix g_in(B, hy.z_dim + CB);
    for (std::size_t b = 0; b < B; ++b) {
        double* row = g_in.row(b);
        for (std::size_t j = 0; j < hy.z_dim; ++j) row[j] = rng.normal();
        std::copy(conds[b].bits.begin(), conds[b].bits.end(), row + hy.z_dim);
    }
    ForwardCache g_cache;
    const Matrix fake = forward(model_.generator, g_in, &g_cache);

    auto with_bits = [&](const Matrix& rows_enc) {
        Matrix out(B, W + CB);
        for (std::size_t b = 0; b < B; ++b) {
            std::copy(rows_enc.row(b), rows_enc.row(b) + W, out.row(b));
            std::copy(bits.row(b), bits.row(b) + CB, out.row(b) + W);
        }
        return out;
    };

    // Discriminator batch: positives stacked over the fakes, shared bits.
    auto disc_update = [&](DenseNet& disc, AdamState& adam, const Matrix& pos_enc,
                           const Matrix& fake_enc, double* loss_out, double* pos_mean,
                           double* fake_mean) {
        Matrix x(2 * B, W + CB);
        for (std::size_t b = 0; b < B; ++b) {
            std::copy(pos_enc.row(b), pos_enc.row(b) + W + CB, x.row(b));
            std::copy(fake_enc.row(b), fake_enc.row(b) + W + CB, x.row(B + b));
        }
        Matrix target(2 * B, 1);
        for (std::size_t b = 0; b < B; ++b) target.at(b, 0) = 1.0;
        ForwardCache cache;
        const Matrix score = forward(disc, x, &cache);
        const LossResult loss = bce_loss(score, target);
        const Grads grads = backward(disc, cache, loss.grad);
        adam_step(disc, grads, adam);
        *loss_out = loss.value;
        double pm = 0.0, fm = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            pm += score.at(b, 0);
            fm += score.at(B + b, 0);
        }
        *pos_mean = pm / static_cast<double>(B);
        *fake_mean = fm / static_cast<double>(B);
    };

    StepMetrics mx;

    Matrix real_enc(B, W);
    for (std::size_t b = 0; b < B; ++b) {
        enc_.encode_row(data_.row(real_rows[b]), {real_enc.row(b), W});
    }
    const Matrix fake_with_bits = with_bits(fake);

    // 4. Data discriminator update: real -> 1, fake -> 0.
    disc_update(model_.disc_data, adam_dm_, with_bits(real_enc), fake_with_bits, &mx.loss_dm,
                &mx.dm_real_mean, &mx.dm_fake_mean);

    // 5. Knowledge discriminator update: knowledge-base samples -> 1, fake -> 0.
    if (hy.kg_on) {
        Matrix valid_enc(B, W);
        for (std::size_t b = 0; b < B; ++b) {
            const Dataset valid = sample_valid(model_.kb, conds[b], 1, rng);
            enc_.encode_row(valid.row(0), {valid_enc.row(b), W});
        }
        double loss = 0.0, vm = 0.0, fm = 0.0;
        disc_update(model_.disc_kg, adam_dkg_, with_bits(valid_enc), fake_with_bits, &loss, &vm,
                    &fm);
        mx.loss_dkg = loss;
        mx.dkg_valid_mean = vm;
        mx.dkg_fake_mean = fm;
    }

    // 6-7. Generator update through the frozen, freshly updated discriminators.
    ForwardCache dm_cache;
    const Matrix s_m = forward(model_.disc_data, fake_with_bits, &dm_cache);
    ForwardCache dkg_cache;
    Matrix s_kg;
    if (hy.kg_on) s_kg = forward(model_.disc_kg, fake_with_bits, &dkg_cache);

    std::vector<double> dc(B), ddc(B);
    double adv = 0.0, dc_sum = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const double raw = hy.kg_on ? 0.5 * (s_m.at(b, 0) + s_kg.at(b, 0)) : s_m.at(b, 0);
        const bool clamped = raw < kScoreEps || raw > 1.0 - kScoreEps;
        dc[b] = std::clamp(raw, kScoreEps, 1.0 - kScoreEps);
        dc_sum += dc[b];
        if (hy.nonsaturating) {
            adv += -std::log(dc[b]);
            ddc[b] = clamped ? 0.0 : -1.0 / (dc[b] * static_cast<double>(B));
        } else {
            adv += std::log(1.0 - dc[b]);
            ddc[b] = clamped ? 0.0 : -1.0 / ((1.0 - dc[b]) * static_cast<double>(B));
        }
    }
    adv /= static_cast<double>(B);
    mx.loss_g_adv = adv;
    mx.dc_fake_mean = dc_sum / static_cast<double>(B);

    Matrix dscore(B, 1);
    const double chain = hy.kg_on ? 0.5 : 1.0;
    for (std::size_t b = 0; b < B; ++b) dscore.at(b, 0) = ddc[b] * chain;

    Matrix dfake(B, W);
    {
        const Grads gm = backward(model_.disc_data, dm_cache, dscore);
        for (std::size_t b = 0; b < B; ++b) {
            const double* src = gm.dinput.row(b);
            double* dst = dfake.row(b);
            for (std::size_t j = 0; j < W; ++j) dst[j] += src[j];
        }
        if (hy.kg_on) {
            const Grads gk = backward(model_.disc_kg, dkg_cache, dscore);
            for (std::size_t b = 0; b < B; ++b) {
                const double* src = gk.dinput.row(b);
                double* dst = dfake.row(b);
                for (std::size_t j = 0; j < W; ++j) dst[j] += src[j];
            }
        }
    }

    // Condition penalty on the generator's own conditional blocks.
    double cond_loss = 0.0;
    std::size_t matched = 0;
    std::vector<double> chat(CB);
    for (std::size_t b = 0; b < B; ++b) {
        const double* frow = fake.row(b);
        bool all_match = true;
        for (std::size_t k = 0; k < enc_.n_conditional(); ++k) {
            const std::size_t ro = enc_.conditional_row_offset(k);
            const std::size_t bo = enc_.conditional_bits_offset(k);
            const std::size_t wk = enc_.conditional_cardinality(k);
            std::size_t best = 0;
            for (std::size_t j = 0; j < wk; ++j) {
                chat[bo + j] = frow[ro + j];
                if (frow[ro + j] > frow[ro + best]) best = j;
            }
            if (static_cast<int>(best) != conds[b].assignment[k]) all_match = false;
        }
        matched += all_match ? 1 : 0;
        cond_loss += condition_bce(conds[b], chat);
        if (hy.lambda_cond > 0.0) {
            double* drow = dfake.row(b);
            const double scale =
                hy.lambda_cond / (static_cast<double>(B) * static_cast<double>(CB));
            for (std::size_t k = 0; k < enc_.n_conditional(); ++k) {
                const std::size_t ro = enc_.conditional_row_offset(k);
                const std::size_t bo = enc_.conditional_bits_offset(k);
                const std::size_t wk = enc_.conditional_cardinality(k);
                for (std::size_t j = 0; j < wk; ++j) {
                    const double t = conds[b].bits[bo + j];
                    const double p = std::clamp(frow[ro + j], kScoreEps, 1.0 - kScoreEps);
                    drow[ro + j] += scale * (-t / p + (1.0 - t) / (1.0 - p));
                }
            }
        }
    }
    cond_loss /= static_cast<double>(B);
    mx.loss_g_cond = cond_loss;
    mx.loss_g = adv + hy.lambda_cond * cond_loss;
    mx.cond_match = static_cast<double>(matched) / static_cast<double>(B);

    const Grads g_grads = backward(model_.generator, g_cache, dfake);
    adam_step(model_.generator, g_grads, adam_g_);

    return mx;
}

std::vector<EpochStats> Trainer::run(Rng& rng,
                                     const std::function<void(const EpochStats&)>& on_epoch) {
    const Hyper& hy = model_.hyper;
    if (hy.epochs == 0) throw Error("train: epochs must be >= 1");
    Rng eval_rng = rng.fork("epoch-eval");

    std::vector<EpochStats> history;
    history.reserve(hy.epochs);
    for (std::size_t e = 1; e <= hy.epochs; ++e) {
        EpochStats stats;
        stats.epoch = e;
        double dkg_sum = 0.0;
        bool any_dkg = false;
        for (std::size_t s = 0; s < steps_per_epoch_; ++s) {
            const StepMetrics mx = step(rng);
            stats.loss_g += mx.loss_g;
            stats.loss_dm += mx.loss_dm;
            stats.cond_match += mx.cond_match;
            if (mx.loss_dkg) {
                dkg_sum += *mx.loss_dkg;
                any_dkg = true;
            }
        }
        const auto n = static_cast<double>(steps_per_epoch_);
        stats.loss_g /= n;
        stats.loss_dm /= n;
        stats.cond_match /= n;
        if (any_dkg) stats.loss_dkg = dkg_sum / n;

        const Dataset probe = generate(model_, hy.eval_sample, {}, eval_rng);
        stats.validity_sample = validity_rate(model_.kb, probe);

        if (on_epoch) on_epoch(stats);
        history.push_back(std::move(stats));
    }
    return history;
}

std::vector<EpochStats> train(GanModel& model, const Dataset& train_data, Rng& rng,
                              const std::function<void(const EpochStats&)>& on_epoch) {
    Trainer trainer(model, train_data);
    return trainer.run(rng, on_epoch);
}

Dataset generate(const GanModel& model, std::size_t n,
                 const std::vector<std::pair<std::string, std::string>>& condition, Rng& rng,
                 GenerationStats* stats) {
    const Encoder enc(model.schema);
    const Hyper& hy = model.hyper;
    const std::size_t W = enc.row_width();
    const std::size_t CB = enc.cond_width();
    const auto fixed = enc.parse_partial_condition(condition);

    Dataset out;
    out.schema = model.schema;
    std::size_t matched = 0;

    std::size_t done = 0;
    while (done < n) {
        const std::size_t chunk = std::min(hy.batch, n - done);
        std::vector<ConditionVector> conds;
        conds.reserve(chunk);
        Matrix g_in(chunk, hy.z_dim + CB);
        // Per-row draw order (condition, then noise) is independent of the
        // chunk size, so any batch setting yields the same stream.
        for (std::size_t b = 0; b < chunk; ++b) {
            std::vector<int> assignment(enc.n_conditional());
            for (std::size_t k = 0; k < enc.n_conditional(); ++k) {
                assignment[k] = fixed[k] ? *fixed[k]
                                         : static_cast<int>(rng.uniform_index(
                                               enc.conditional_cardinality(k)));
            }
            conds.push_back(enc.build_condition(assignment));
            double* row = g_in.row(b);
            for (std::size_t j = 0; j < hy.z_dim; ++j) row[j] = rng.normal();
            std::copy(conds[b].bits.begin(), conds[b].bits.end(), row + hy.z_dim);
        }
        Matrix fake = forward(model.generator, g_in);
        for (std::size_t b = 0; b < chunk; ++b) {
            double* frow = fake.row(b);
            bool all_match = true;
            for (std::size_t k = 0; k < enc.n_conditional(); ++k) {
                const std::size_t ro = enc.conditional_row_offset(k);
                const std::size_t wk = enc.conditional_cardinality(k);
                std::size_t best = 0;
                for (std::size_t j = 1; j < wk; ++j) {
                    if (frow[ro + j] > frow[ro + best]) best = j;
                }
                if (static_cast<int>(best) != conds[b].assignment[k]) all_match = false;
            }
            matched += all_match ? 1 : 0;
            if (hy.enforce_condition) {
                for (std::size_t k = 0; k < enc.n_conditional(); ++k) {
                    const std::size_t ro = enc.conditional_row_offset(k);
                    const std::size_t wk = enc.conditional_cardinality(k);
                    for (std::size_t j = 0; j < wk; ++j) {
                        frow[ro + j] =
                            conds[b].bits[enc.conditional_bits_offset(k) + j];
                    }
                }
            }
            out.push_row(enc.decode_vector({frow, W}));
        }
        done += chunk;
    }

    if (stats) {
        stats->rows = n;
        stats->cond_match = n == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(n);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCheckpointHeader = "KINETGAN-CKPT v1";

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::size_t count_lines(const std::string& text) {
    if (text.empty()) return 0;
    std::size_t n = std::count(text.begin(), text.end(), '\n');
    if (text.back() != '\n') ++n;
    return n;
}

void write_net(std::ostream& out, const std::string& name, const DenseNet& net) {
    out << "net " << name << '\n';
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        save_matrix(out, "w" + std::to_string(l), net.layers[l].w);
        Matrix bias(1, net.layers[l].b.size());
        bias.a = net.layers[l].b;
        save_matrix(out, "b" + std::to_string(l), bias);
    }
}

class LineReader {
public:
    explicit LineReader(const std::string& text) {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string::npos) end = text.size();
            std::string line = text.substr(pos, end - pos);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines_.push_back(std::move(line));
            if (end == text.size()) break;
            pos = end + 1;
        }
        // drop the empty tail produced by a trailing newline
        if (!lines_.empty() && lines_.back().empty()) lines_.pop_back();
    }

    const std::string& next() {
        if (cursor_ >= lines_.size()) throw Error("checkpoint: truncated file");
        return lines_[cursor_++];
    }

    bool done() const { return cursor_ >= lines_.size(); }

private:
    std::vector<std::string> lines_;
    std::size_t cursor_ = 0;
};

Matrix read_matrix_lines(LineReader& in, const std::string& expected) {
    const auto header = split_ws(in.next());
    if (header.size() != 4 || header[0] != "mat" || header[1] != expected)
        throw Error("checkpoint: expected 'mat " + expected + "' section");
    std::uint64_t rows = 0, cols = 0;
    if (!parse_u64(header[2], &rows) || !parse_u64(header[3], &cols))
        throw Error("checkpoint: bad matrix shape for '" + expected + "'");
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto vals = split_ws(in.next());
        if (vals.size() != cols) throw Error("checkpoint: truncated matrix '" + expected + "'");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!parse_double(vals[c], &m.at(r, c)))
                throw Error("checkpoint: bad value in matrix '" + expected + "'");
        }
    }
    return m;
}

void read_net(LineReader& in, const std::string& name, DenseNet* net) {
    const auto header = split_ws(in.next());
    if (header.size() != 2 || header[0] != "net" || header[1] != name)
        throw Error("checkpoint: expected 'net " + name + "' section");
    for (std::size_t l = 0; l < net->layers.size(); ++l) {
        Matrix w = read_matrix_lines(in, "w" + std::to_string(l));
        if (w.rows != net->layers[l].w.rows || w.cols != net->layers[l].w.cols)
            throw Error("checkpoint: matrix shape mismatch in net '" + name + "'");
        Matrix b = read_matrix_lines(in, "b" + std::to_string(l));
        if (b.rows != 1 || b.cols != net->layers[l].b.size())
            throw Error("checkpoint: bias shape mismatch in net '" + name + "'");
        net->layers[l].w = std::move(w);
        net->layers[l].b = std::move(b.a);
    }
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write file '" + tmp + "'");
        out << content;
        if (!out.good()) throw Error("failed writing '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void save_checkpoint(const GanModel& model, const std::string& path) {
    std::ostringstream out;
    char fp[24];
    std::snprintf(fp, sizeof(fp), "%016" PRIx64, schema_fingerprint(model.schema));
    out << kCheckpointHeader << '\n';
    out << "schema-fp " << fp << '\n';
    out << "seed " << model.seed << '\n';
    const Hyper& hy = model.hyper;
    out << "hyper " << hy.batch << ' ' << hy.epochs << ' ' << hy.z_dim << ' ' << hy.hidden << ' '
        << format_g17(hy.lambda_cond) << ' ' << (hy.kg_on ? 1 : 0) << ' '
        << (hy.enforce_condition ? 1 : 0) << ' ' << (hy.nonsaturating ? 1 : 0) << ' '
        << hy.match_retries << ' ' << hy.eval_sample << '\n';
    const auto write_adam = [&](const char* tag, const AdamConfig& cfg) {
        out << "adam " << tag << ' ' << format_g17(cfg.lr) << ' ' << format_g17(cfg.beta1) << ' '
            << format_g17(cfg.beta2) << ' ' << format_g17(cfg.eps) << '\n';
    };
    write_adam("g", hy.adam_g);
    write_adam("dm", hy.adam_dm);
    write_adam("dkg", hy.adam_dkg);

    const std::string schema_text = schema_to_text(model.schema);
    out << "schema-text " << count_lines(schema_text) << '\n' << schema_text;
    const std::string& rules_text = model.kb.source_text;
    out << "rules-text " << count_lines(rules_text) << '\n';
    out << rules_text;
    if (!rules_text.empty() && rules_text.back() != '\n') out << '\n';

    write_net(out, "generator", model.generator);
    write_net(out, "disc_data", model.disc_data);
    write_net(out, "disc_kg", model.disc_kg);
    out << "end\n";
    atomic_write(path, out.str());
}

namespace {

struct CheckpointText {
    std::string schema_fp;
    std::uint64_t seed = 0;
    Hyper hyper;
    std::string schema_text;
    std::string rules_text;
    LineReader reader;

    explicit CheckpointText(const std::string& path) : reader(read_text_file(path)) {
        if (reader.next() != kCheckpointHeader)
            throw Error("checkpoint: unsupported version (expected '" +
                        std::string(kCheckpointHeader) + "')");
        auto tok = split_ws(reader.next());
        if (tok.size() != 2 || tok[0] != "schema-fp")
            throw Error("checkpoint: missing schema fingerprint");
        schema_fp = tok[1];
        tok = split_ws(reader.next());
        if (tok.size() != 2 || tok[0] != "seed" || !parse_u64(tok[1], &seed))
            throw Error("checkpoint: missing seed");
        tok = split_ws(reader.next());
        std::uint64_t u = 0;
        if (tok.size() != 11 || tok[0] != "hyper")
            throw Error("checkpoint: missing hyper block");
        auto as_size = [&](const std::string& s) {
            if (!parse_u64(s, &u)) throw Error("checkpoint: bad hyper value");
            return static_cast<std::size_t>(u);
        };
        hyper.batch = as_size(tok[1]);
        hyper.epochs = as_size(tok[2]);
        hyper.z_dim = as_size(tok[3]);
        hyper.hidden = as_size(tok[4]);
        if (!parse_double(tok[5], &hyper.lambda_cond))
            throw Error("checkpoint: bad lambda_cond");
        hyper.kg_on = tok[6] == "1";
        hyper.enforce_condition = tok[7] == "1";
        hyper.nonsaturating = tok[8] == "1";
        hyper.match_retries = as_size(tok[9]);
        hyper.eval_sample = as_size(tok[10]);
        const auto read_adam = [&](const char* tag, AdamConfig* cfg) {
            const auto at = split_ws(reader.next());
            if (at.size() != 6 || at[0] != "adam" || at[1] != tag ||
                !parse_double(at[2], &cfg->lr) || !parse_double(at[3], &cfg->beta1) ||
                !parse_double(at[4], &cfg->beta2) || !parse_double(at[5], &cfg->eps))
                throw Error("checkpoint: bad adam block '" + std::string(tag) + "'");
        };
        read_adam("g", &hyper.adam_g);
        read_adam("dm", &hyper.adam_dm);
        read_adam("dkg", &hyper.adam_dkg);
        schema_text = read_block("schema-text");
        rules_text = read_block("rules-text");
    }

    std::string read_block(const char* tag) {
        const auto tok = split_ws(reader.next());
        std::uint64_t n = 0;
        if (tok.size() != 2 || tok[0] != tag || !parse_u64(tok[1], &n))
            throw Error("checkpoint: missing '" + std::string(tag) + "' block");
        std::string text;
        for (std::uint64_t i = 0; i < n; ++i) {
            text += reader.next();
            text += '\n';
        }
        return text;
    }
};

GanModel finish_load(CheckpointText& ck, const TableSchema& schema, const KnowledgeBase& kb) {
    char fp[24];
    std::snprintf(fp, sizeof(fp), "%016" PRIx64, schema_fingerprint(schema));
    if (ck.schema_fp != fp)
        throw Error("checkpoint: schema fingerprint mismatch (file " + ck.schema_fp +
                    ", schema " + fp + ")");
    GanModel model = init_model(schema, kb, ck.hyper, ck.seed);
    read_net(ck.reader, "generator", &model.generator);
    read_net(ck.reader, "disc_data", &model.disc_data);
    read_net(ck.reader, "disc_kg", &model.disc_kg);
    if (ck.reader.next() != "end") throw Error("checkpoint: missing end marker");
    return model;
}

}  // namespace

GanModel load_checkpoint(const std::string& path, const TableSchema& schema,
                         const KnowledgeBase& kb) {
    CheckpointText ck(path);
    return finish_load(ck, schema, kb);
}

GanModel load_checkpoint_embedded(const std::string& path) {
    CheckpointText ck(path);
    const TableSchema schema = parse_schema(ck.schema_text);
    const KnowledgeBase kb = load_rules(ck.rules_text, schema);
    return finish_load(ck, schema, kb);
}

}  // namespace kinetgan
