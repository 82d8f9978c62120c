#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kinetgan/dataset.hpp"
#include "kinetgan/schema.hpp"

namespace kinetgan {

// Per-column sampler within one event profile.
struct ColumnSampler {
    enum class Kind { Weighted, ClippedNormal } kind = Kind::Weighted;
    std::vector<double> weights;  // Weighted: normalized, one per category
    double mean = 0.0, stddev = 0.0;
    double clip_lo = 0.0, clip_hi = 0.0;  // ClippedNormal: defaults to schema bounds
    bool configured = false;
};

// Ground-truth traffic generator: an event mixture over the label column plus
// per-event samplers for every other column. The referenced rules file is the
// constraint base the profiles are expected to respect.
struct WorldSpec {
    TableSchema schema;
    std::string schema_path;
    std::string rules_path;             // may be empty
    std::vector<double> mixture;        // one probability per label category
    std::vector<std::vector<ColumnSampler>> samplers;  // [event][column]
};

// Line-oriented world grammar:
//   schema <path>            (relative to the world file)
//   rules <path>             (optional)
//   event <name> <prob>
//   sampler <event> <column> cat <v:w,...>
//   sampler <event> <column> norm <mean> <std> [<clip_lo> <clip_hi>]
// '#' starts a comment. Every declared event needs a sampler for every
// non-label column; mixture probabilities must sum to 1 +- 1e-9.
WorldSpec parse_world(const std::string& text, const std::string& base_dir);
WorldSpec load_world_file(const std::string& path);

Dataset simulate_corpus(const WorldSpec& world, std::size_t n, std::uint64_t seed);

}  // namespace kinetgan
