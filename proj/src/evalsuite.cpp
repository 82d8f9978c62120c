#include "kinetgan/evalsuite.hpp"

#include <algorithm>
#include <cmath>

#include "kinetgan/encoder.hpp"

namespace kinetgan {

namespace {

void check_comparable(const Dataset& real, const Dataset& synth) {
    if (!schema_equal(real.schema, synth.schema))
        throw Error("datasets have different schemas");
    if (real.rows == 0 || synth.rows == 0) throw Error("datasets must be non-empty");
}

std::vector<double> normalized_column(const Dataset& ds, std::size_t col) {
    const auto& spec = ds.schema.columns[col];
    std::vector<double> out(ds.rows);
    for (std::size_t r = 0; r < ds.rows; ++r) {
        out[r] = (ds.at(r, col) - spec.lo) / (spec.hi - spec.lo);
    }
    return out;
}

std::vector<double> category_freqs(const Dataset& ds, std::size_t col) {
    std::vector<double> freq(ds.schema.columns[col].cardinality(), 0.0);
    for (std::size_t r = 0; r < ds.rows; ++r) {
        freq[static_cast<std::size_t>(ds.cat(r, col))] += 1.0;
    }
    for (auto& f : freq) f /= static_cast<double>(ds.rows);
    return freq;
}

// W1 between two empirical distributions as the integral of |F_a - F_b| over
// the merged support. Equals mean |sorted a - sorted b| for equal sizes.
double wasserstein1(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double step_a = 1.0 / static_cast<double>(a.size());
    const double step_b = 1.0 / static_cast<double>(b.size());
    double emd = 0.0, fa = 0.0, fb = 0.0;
    std::size_t i = 0, j = 0;
    double prev = std::min(a.front(), b.front());
    while (i < a.size() || j < b.size()) {
        double x;
        if (i < a.size() && (j == b.size() || a[i] <= b[j])) {
            x = a[i];
        } else {
            x = b[j];
        }
        emd += std::abs(fa - fb) * (x - prev);
        while (i < a.size() && a[i] == x) {
            fa += step_a;
            ++i;
        }
        while (j < b.size() && b[j] == x) {
            fb += step_b;
            ++j;
        }
        prev = x;
    }
    return emd;
}

constexpr std::size_t kHistogramBins = 20;

std::vector<double> histogram(const std::vector<double>& normalized) {
    std::vector<double> h(kHistogramBins, 0.0);
    for (const double v : normalized) {
        const auto bin = std::min<std::size_t>(
            kHistogramBins - 1,
            static_cast<std::size_t>(std::max(0.0, v) * kHistogramBins));
        h[bin] += 1.0;
    }
    for (auto& x : h) x /= static_cast<double>(normalized.size());
    return h;
}

}  // namespace

double column_emd(const Dataset& real, const Dataset& synth, std::size_t col) {
    check_comparable(real, synth);
    if (col >= real.cols()) throw Error("column_emd: column index out of range");
    const auto& spec = real.schema.columns[col];
    if (spec.is_categorical()) {
        const auto p = category_freqs(real, col);
        const auto q = category_freqs(synth, col);
        double tv = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
        return 0.5 * tv;
    }
    return wasserstein1(normalized_column(real, col), normalized_column(synth, col));
}

double column_emd(const Dataset& real, const Dataset& synth, const std::string& col) {
    const int idx = real.schema.column_index(col);
    if (idx < 0) throw Error("column_emd: unknown column '" + col + "'");
    return column_emd(real, synth, static_cast<std::size_t>(idx));
}

double mixed_distance(const Dataset& real, const Dataset& synth) {
    check_comparable(real, synth);
    double total = 0.0;
    for (std::size_t c = 0; c < real.cols(); ++c) {
        const auto& spec = real.schema.columns[c];
        if (spec.is_categorical()) {
            const auto p = category_freqs(real, c);
            const auto q = category_freqs(synth, c);
            double l1 = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) l1 += std::abs(p[i] - q[i]);
            total += l1;
        } else {
            const auto p = histogram(normalized_column(real, c));
            const auto q = histogram(normalized_column(synth, c));
            double l2 = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) l2 += (p[i] - q[i]) * (p[i] - q[i]);
            total += std::sqrt(l2);
        }
    }
    return total / static_cast<double>(real.cols());
}

FidelityReport fidelity_report(const Dataset& real, const Dataset& synth,
                               const KnowledgeBase* kb) {
    check_comparable(real, synth);
    FidelityReport report;
    double sum = 0.0;
    for (std::size_t c = 0; c < real.cols(); ++c) {
        const double emd = column_emd(real, synth, c);
        report.per_column_emd.emplace_back(real.schema.columns[c].name, emd);
        sum += emd;
    }
    report.mean_emd = sum / static_cast<double>(real.cols());
    report.mixed_distance = kinetgan::mixed_distance(real, synth);
    if (kb) report.validity_rate = validity_rate(*kb, synth);
    return report;
}

nlohmann::ordered_json FidelityReport::to_json() const {
    nlohmann::ordered_json j;
    nlohmann::ordered_json per;
    for (const auto& [name, emd] : per_column_emd) per[name] = emd;
    j["per_column_emd"] = per;
    j["mean_emd"] = mean_emd;
    j["mixed_distance"] = mixed_distance;
    if (validity_rate) j["validity_rate"] = *validity_rate;
    return j;
}

namespace {

struct FeatureView {
    Encoder enc;
    std::vector<std::size_t> slots;  // encoded positions excluding the label block
    std::size_t label_col;

    FeatureView(const TableSchema& schema, const std::string& label_name)
        : enc(schema), label_col(0) {
        const int idx = schema.column_index(label_name);
        if (idx < 0) throw Error("label column '" + label_name + "' not found");
        if (!schema.columns[static_cast<std::size_t>(idx)].is_categorical())
            throw Error("label column '" + label_name + "' must be categorical");
        label_col = static_cast<std::size_t>(idx);
        const std::size_t off = enc.block_offset(label_col);
        const std::size_t w = enc.block_width(label_col);
        for (std::size_t i = 0; i < enc.row_width(); ++i) {
            if (i < off || i >= off + w) slots.push_back(i);
        }
        if (slots.empty()) throw Error("no feature columns besides the label");
    }

    Matrix features(const Dataset& ds) const {
        Matrix x(ds.rows, slots.size());
        std::vector<double> row(enc.row_width());
        for (std::size_t r = 0; r < ds.rows; ++r) {
            enc.encode_row(ds.row(r), row);
            for (std::size_t j = 0; j < slots.size(); ++j) x.at(r, j) = row[slots[j]];
        }
        return x;
    }
};

}  // namespace

SoftmaxClassifier fit_classifier(const Dataset& train, const std::string& label_col,
                                 const ClassifierHyper& hyper, std::uint64_t seed) {
    if (train.rows == 0) throw Error("fit_classifier: empty training set");
    FeatureView view(train.schema, label_col);
    const std::size_t classes = train.schema.columns[view.label_col].cardinality();

    std::vector<char> present(classes, 0);
    for (std::size_t r = 0; r < train.rows; ++r) {
        present[static_cast<std::size_t>(train.cat(r, view.label_col))] = 1;
    }
    if (std::count(present.begin(), present.end(), 1) < 2)
        throw Error("fit_classifier: training set has a single class");

    SoftmaxClassifier clf;
    clf.schema = train.schema;
    clf.label_col = static_cast<int>(view.label_col);
    clf.feature_slots = view.slots;
    clf.net = init_net({view.slots.size(), classes},
                       {ActSpec::block_softmax({{classes, true}})}, seed);

    const Matrix x = view.features(train);
    Matrix target(train.rows, classes);
    for (std::size_t r = 0; r < train.rows; ++r) {
        target.at(r, static_cast<std::size_t>(train.cat(r, view.label_col))) = 1.0;
    }
    for (std::size_t e = 0; e < hyper.epochs; ++e) {
        ForwardCache cache;
        const Matrix probs = forward(clf.net, x, &cache);
        const LossResult loss = cross_entropy_loss(probs, target);
        const Grads grads = backward(clf.net, cache, loss.grad);
        sgd_step(clf.net, grads, hyper.lr);
    }
    return clf;
}

std::vector<int> classify(const SoftmaxClassifier& clf, const Dataset& data) {
    if (!schema_equal(clf.schema, data.schema))
        throw Error("classify: dataset schema does not match the classifier");
    FeatureView view(data.schema, data.schema.columns[static_cast<std::size_t>(clf.label_col)].name);
    const Matrix probs = forward(clf.net, view.features(data));
    std::vector<int> labels(data.rows);
    for (std::size_t r = 0; r < data.rows; ++r) {
        const double* row = probs.row(r);
        std::size_t best = 0;
        for (std::size_t j = 1; j < probs.cols; ++j) {
            if (row[j] > row[best]) best = j;
        }
        labels[r] = static_cast<int>(best);
    }
    return labels;
}

double classification_accuracy(const SoftmaxClassifier& clf, const Dataset& data) {
    if (data.rows == 0) throw Error("accuracy: empty dataset");
    const auto predicted = classify(clf, data);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < data.rows; ++r) {
        if (predicted[r] == data.cat(r, static_cast<std::size_t>(clf.label_col))) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.rows);
}

UtilityResult tstr_utility(const Dataset& synth_train, const Dataset& real_train,
                           const Dataset& real_test, const std::string& label_col,
                           const ClassifierHyper& hyper, std::uint64_t seed) {
    if (real_test.rows == 0) throw Error("tstr_utility: empty test set");
    check_comparable(synth_train, real_train);
    check_comparable(real_train, real_test);
    UtilityResult result;
    const SoftmaxClassifier on_synth = fit_classifier(synth_train, label_col, hyper, seed);
    result.acc_tstr = classification_accuracy(on_synth, real_test);
    const SoftmaxClassifier on_real = fit_classifier(real_train, label_col, hyper, seed);
    result.acc_trtr = classification_accuracy(on_real, real_test);
    return result;
}

nlohmann::ordered_json UtilityResult::to_json() const {
    nlohmann::ordered_json j;
    j["acc_tstr"] = acc_tstr;
    j["acc_trtr"] = acc_trtr;
    j["gap"] = acc_trtr - acc_tstr;
    return j;
}

}  // namespace kinetgan
