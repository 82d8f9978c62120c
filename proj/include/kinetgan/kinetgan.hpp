#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kinetgan/dataset.hpp"
#include "kinetgan/encoder.hpp"
#include "kinetgan/netkg.hpp"
#include "kinetgan/neuralnet.hpp"
#include "kinetgan/rng.hpp"
#include "kinetgan/schema.hpp"

namespace kinetgan {

struct Hyper {
    std::size_t batch = 128;
    std::size_t epochs = 300;
    std::size_t z_dim = 64;
    std::size_t hidden = 128;
    AdamConfig adam_g;    // lr 2e-4, betas 0.5/0.9 by default
    AdamConfig adam_dm;
    AdamConfig adam_dkg;
    double lambda_cond = 1.0;     // weight of the condition BCE penalty
    bool kg_on = true;            // off = no-knowledge ablation
    bool enforce_condition = false;
    bool nonsaturating = false;   // generator maximizes log D_C instead
    std::size_t match_retries = 20;  // condition redraws before starvation
    std::size_t eval_sample = 256;   // rows generated per epoch for the log
};

void validate_hyper(const Hyper& hyper);

// Conditional generator plus the two discriminators. The generator maps
// noise + condition bits to an encoded row (block-softmax over categorical
// blocks, sigmoid over continuous slots); both discriminators score an
// encoded row concatenated with the condition bits. The knowledge
// discriminator is always allocated so the ablation differs only in use.
struct GanModel {
    TableSchema schema;
    KnowledgeBase kb;
    Hyper hyper;
    std::uint64_t seed = 0;
    DenseNet generator;
    DenseNet disc_data;
    DenseNet disc_kg;
};

GanModel init_model(const TableSchema& schema, const KnowledgeBase& kb, const Hyper& hyper,
                    std::uint64_t seed);

struct StepMetrics {
    double loss_g = 0.0;       // adversarial + lambda * condition term
    double loss_g_adv = 0.0;
    double loss_g_cond = 0.0;
    double loss_dm = 0.0;
    std::optional<double> loss_dkg;
    double dm_real_mean = 0.0;
    double dm_fake_mean = 0.0;
    std::optional<double> dkg_valid_mean;
    std::optional<double> dkg_fake_mean;
    double dc_fake_mean = 0.0;
    double cond_match = 0.0;   // all conditional blocks argmax-match their condition
};

struct EpochStats {
    std::size_t epoch = 0;
    double loss_g = 0.0;
    double loss_dm = 0.0;
    std::optional<double> loss_dkg;
    double cond_match = 0.0;
    double validity_sample = 0.0;  // validity rate of a generated probe sample
};

// Index of real rows by conditional assignment, for condition-matched
// batch sampling.
class RealMatcher {
public:
    RealMatcher(const Dataset& data, const Encoder& enc);
    const std::vector<std::uint32_t>* rows(const std::vector<int>& assignment) const;

private:
    std::map<std::vector<int>, std::vector<std::uint32_t>> buckets_;
};

// Owns optimizer state for one training run over a fixed dataset.
//
// Random stream order per step (relied on by tests): for each batch slot, up
// to `match_retries` condition draws each followed by one row pick when the
// bucket is non-empty; then z_dim normals per slot; then, with the knowledge
// discriminator enabled, one sample_valid draw per slot.
class Trainer {
public:
    Trainer(GanModel& model, const Dataset& train_data);

    StepMetrics step(Rng& rng);
    std::size_t steps_per_epoch() const { return steps_per_epoch_; }

    // Runs hyper.epochs * steps_per_epoch() steps; per-epoch stats are the
    // step means plus the validity rate of a freshly generated probe sample.
    std::vector<EpochStats> run(Rng& rng,
                                const std::function<void(const EpochStats&)>& on_epoch = {});

private:
    GanModel& model_;
    const Dataset& data_;
    Encoder enc_;
    RealMatcher matcher_;
    AdamState adam_g_, adam_dm_, adam_dkg_;
    std::size_t steps_per_epoch_ = 0;
};

std::vector<EpochStats> train(GanModel& model, const Dataset& train_data, Rng& rng,
                              const std::function<void(const EpochStats&)>& on_epoch = {});

struct GenerationStats {
    std::size_t rows = 0;
    double cond_match = 0.0;
};

// Draws n rows. A (possibly partial) condition fixes the named conditional
// attributes; unassigned ones are resampled uniformly per row. With
// hyper.enforce_condition the conditional blocks are overwritten from the
// condition bits before decoding. cond_match in stats is measured before any
// enforcement.
Dataset generate(const GanModel& model, std::size_t n,
                 const std::vector<std::pair<std::string, std::string>>& condition, Rng& rng,
                 GenerationStats* stats = nullptr);

// Checkpoint: "KINETGAN-CKPT v1" header, schema fingerprint, hyper block,
// embedded schema/rules text, then one matrix section per net. Writes are
// atomic (temp file + rename); parameters round-trip bit-exactly.
void save_checkpoint(const GanModel& model, const std::string& path);
GanModel load_checkpoint(const std::string& path, const TableSchema& schema,
                         const KnowledgeBase& kb);
// Reconstructs schema and rules from the text embedded in the checkpoint.
GanModel load_checkpoint_embedded(const std::string& path);

}  // namespace kinetgan
