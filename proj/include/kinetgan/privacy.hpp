#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "kinetgan/dataset.hpp"
#include "kinetgan/kinetgan.hpp"

namespace kinetgan {

struct AttackReport {
    std::string attack;
    nlohmann::ordered_json params;
    double accuracy = 0.0;
    double baseline = 0.0;  // chance level
    std::size_t trials = 0;

    nlohmann::ordered_json to_json() const;
};

// Nearest-neighbor linkage: a seeded sample of overlap_fraction of the real
// rows is the attacker's knowledge; each known row is matched to its nearest
// synthetic row over the quasi-identifier columns (one-hot L1 + normalized
// L2, ties to the lowest synthetic index) and the remaining categorical
// cells are predicted by copying. Accuracy counts rows with every non-quasi
// categorical cell correct; baseline is the independent-guess rate.
AttackReport reident_attack(const Dataset& real, const Dataset& synth, double overlap_fraction,
                            const std::vector<std::string>& quasi_cols, std::uint64_t seed);

// Fits the classifier on synthetic data restricted to the quasi columns with
// the sensitive column as label, then scores it on real rows. Baseline is the
// majority-class rate of the real test set.
AttackReport attribute_inference(const Dataset& real_test, const Dataset& synth,
                                 const std::string& sensitive_col,
                                 const std::vector<std::string>& quasi_cols, std::uint64_t seed);

enum class MiaMode { WhiteBox, FullyBlackBox };

// Balanced membership inference. White-box scores candidates with the data
// discriminator (row encoding + the row's own condition bits); fully-black-box
// scores by negative distance to the nearest synthetic row. Median threshold
// over all scores, member iff above. Baseline 0.5.
AttackReport membership_inference(const GanModel* model, const Dataset* synth,
                                  const Dataset& members, const Dataset& nonmembers,
                                  MiaMode mode, std::uint64_t seed);

// Conditional attributes plus protocol/port columns.
std::vector<std::string> default_quasi_columns(const TableSchema& schema);

}  // namespace kinetgan
