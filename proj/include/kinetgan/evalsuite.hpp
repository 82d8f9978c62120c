#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kinetgan/dataset.hpp"
#include "kinetgan/netkg.hpp"
#include "kinetgan/neuralnet.hpp"

namespace kinetgan {

// Per-column distribution distance. Continuous columns: exact 1-D
// Wasserstein-1 between the empirical distributions of min-max-normalized
// values. Categorical columns: total variation distance between category
// frequencies (the Wasserstein-1 under a 0/1 ground metric). Both land in
// [0, 1]. Symmetric in its two dataset arguments.
double column_emd(const Dataset& real, const Dataset& synth, std::size_t col);
double column_emd(const Dataset& real, const Dataset& synth, const std::string& col);

// Mean over columns of: L1 distance between category frequency vectors
// (categorical) / L2 distance between 20-bin histograms of normalized values
// (continuous).
double mixed_distance(const Dataset& real, const Dataset& synth);

struct FidelityReport {
    std::vector<std::pair<std::string, double>> per_column_emd;  // schema order
    double mean_emd = 0.0;
    double mixed_distance = 0.0;
    std::optional<double> validity_rate;  // synthetic rows, when a kb is given

    nlohmann::ordered_json to_json() const;
};

FidelityReport fidelity_report(const Dataset& real, const Dataset& synth,
                               const KnowledgeBase* kb = nullptr);

struct ClassifierHyper {
    double lr = 0.5;
    std::size_t epochs = 600;
};

// Multinomial logistic regression over encoded features (label block
// excluded), trained by full-batch gradient descent.
struct SoftmaxClassifier {
    TableSchema schema;
    int label_col = -1;
    std::vector<std::size_t> feature_slots;  // encoded-row positions used
    DenseNet net;                            // single layer, softmax head
};

SoftmaxClassifier fit_classifier(const Dataset& train, const std::string& label_col,
                                 const ClassifierHyper& hyper, std::uint64_t seed);

std::vector<int> classify(const SoftmaxClassifier& clf, const Dataset& data);
double classification_accuracy(const SoftmaxClassifier& clf, const Dataset& data);

struct UtilityResult {
    double acc_tstr = 0.0;  // classifier fit on synthetic, scored on real test
    double acc_trtr = 0.0;  // classifier fit on real train, scored on real test

    nlohmann::ordered_json to_json() const;
};

UtilityResult tstr_utility(const Dataset& synth_train, const Dataset& real_train,
                           const Dataset& real_test, const std::string& label_col,
                           const ClassifierHyper& hyper, std::uint64_t seed);

}  // namespace kinetgan
