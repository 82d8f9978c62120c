#include "kinetgan/cli.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kinetgan/dataset.hpp"
#include "kinetgan/encoder.hpp"
#include "kinetgan/evalsuite.hpp"
#include "kinetgan/kinetgan.hpp"
#include "kinetgan/netkg.hpp"
#include "kinetgan/privacy.hpp"
#include "kinetgan/rng.hpp"
#include "kinetgan/schema.hpp"
#include "kinetgan/world.hpp"
#include "parse_util.hpp"

namespace kinetgan::cli {

namespace {

using nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr const char* kUsage = R"(usage: kinetgan <subcommand> [flags]

subcommands:
  sim        --world W --n N --seed S --out D.csv
  train      --schema F --data D.csv --epochs E --seed S --out M.ckpt
             [--rules R] [--no-kg] [--batch B] [--zdim Z] [--hidden H]
             [--lambda-cond L] [--lr-g LR] [--lr-d LR] [--lr-dkg LR]
             [--beta2 B2] [--nonsaturating] [--enforce-condition] [--clamp]
             [--log FILE]
  generate   --model M.ckpt --n N --seed S --out S.csv
             [--condition col=val,...] [--enforce-condition]
  evaluate   --schema F --real A.csv --synth B.csv --out report.json
             [--rules R] [--seed S] [--clamp]
  utility    --schema F --synth-train S.csv --real-train T.csv --real-test H.csv
             --label L --seed S --out report.json [--clf-epochs N] [--clf-lr LR]
  attack     --type reident|attrib|mia --schema F --out report.json --seed S ...
             reident: --real A.csv --synth B.csv --overlap F [--quasi c1,c2]
             attrib:  --real A.csv --synth B.csv --sensitive COL [--quasi c1,c2]
             mia:     --mode WB|FBB --members A.csv --nonmembers B.csv
                      (WB: --model M.ckpt; FBB: --synth S.csv)
  gradcheck  --seed S [--schema F]

Datasets are CSV with a header row; reports are JSON. Every report embeds the
tool version, the seed, and digests of the input files.
)";

// ---------------------------------------------------------------------------
// Flag parsing
// ---------------------------------------------------------------------------

const std::set<std::string> kBoolFlags = {"--no-kg", "--enforce-condition", "--clamp",
                                          "--nonsaturating"};

struct Args {
    std::string subcommand;
    std::map<std::string, std::string> values;
    std::set<std::string> switches;
    std::set<std::string> consumed;

    bool has(const std::string& flag) const {
        return values.count(flag) > 0 || switches.count(flag) > 0;
    }

    std::string require(const std::string& flag) {
        const auto it = values.find(flag);
        if (it == values.end()) throw UsageError("missing required flag " + flag);
        consumed.insert(flag);
        return it->second;
    }

    std::optional<std::string> optional(const std::string& flag) {
        const auto it = values.find(flag);
        if (it == values.end()) return std::nullopt;
        consumed.insert(flag);
        return it->second;
    }

    bool flag(const std::string& name) {
        consumed.insert(name);
        return switches.count(name) > 0;
    }

    void finish() const {
        for (const auto& [k, v] : values) {
            if (!consumed.count(k)) throw UsageError("unknown flag " + k);
        }
        for (const auto& k : switches) {
            if (!consumed.count(k)) throw UsageError("unknown flag " + k);
        }
    }
};

Args parse_args(const std::vector<std::string>& argv) {
    Args args;
    args.subcommand = argv[0];
    for (std::size_t i = 1; i < argv.size(); ++i) {
        const std::string& tok = argv[i];
        if (tok.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + tok + "'");
        if (kBoolFlags.count(tok)) {
            args.switches.insert(tok);
            continue;
        }
        if (i + 1 >= argv.size()) throw UsageError("flag " + tok + " needs a value");
        if (args.values.count(tok)) throw UsageError("duplicate flag " + tok);
        args.values[tok] = argv[++i];
    }
    return args;
}

std::uint64_t parse_seed(const std::string& text) {
    std::uint64_t v = 0;
    if (!detail::parse_u64(text, &v)) throw UsageError("bad seed '" + text + "'");
    return v;
}

std::size_t parse_count(const std::string& text, const std::string& flag, std::size_t min = 0) {
    std::uint64_t v = 0;
    if (!detail::parse_u64(text, &v)) throw UsageError("bad value for " + flag);
    if (v < min) throw UsageError(flag + " must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

double parse_real(const std::string& text, const std::string& flag) {
    double v = 0.0;
    if (!detail::parse_double(text, &v)) throw UsageError("bad value for " + flag);
    return v;
}

std::vector<std::pair<std::string, std::string>> parse_condition_flag(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& part : detail::split(text, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos)
            throw UsageError("--condition entries must be col=val, got '" + part + "'");
        out.emplace_back(detail::trim(part.substr(0, eq)), detail::trim(part.substr(eq + 1)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report plumbing
// ---------------------------------------------------------------------------

std::string hex_digest(const std::string& bytes) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a64(bytes));
    return buf;
}

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write file '" + tmp + "'");
        out << content;
        if (!out.good()) throw Error("failed writing '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

// Provenance block: tool version, seed, and a digest per input file.
class Report {
public:
    explicit Report(std::uint64_t seed) {
        json_["tool"] = "kinetgan";
        json_["version"] = kToolVersion;
        json_["seed"] = seed;
        json_["inputs"] = ordered_json::object();
    }

    void add_input(const std::string& role, const std::string& path) {
        ordered_json entry;
        entry["path"] = path;
        entry["fnv1a64"] = hex_digest(read_text_file(path));
        json_["inputs"][role] = entry;
    }

    void merge(const ordered_json& payload) {
        for (const auto& [k, v] : payload.items()) json_[k] = v;
    }

    void write(const std::string& path) const { atomic_write_text(path, json_.dump(2) + "\n"); }

private:
    ordered_json json_;
};

void write_dataset(const Dataset& ds, const std::string& path) {
    atomic_write_text(path, dataset_to_csv(ds));
}

KnowledgeBase load_optional_rules(Args& args, const TableSchema& schema, Report* report) {
    if (const auto rules = args.optional("--rules")) {
        if (report) report->add_input("rules", *rules);
        return load_rules_file(*rules, schema);
    }
    return load_rules("", schema);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_sim(Args& args) {
    const std::string world_path = args.require("--world");
    const std::size_t n = parse_count(args.require("--n"), "--n");
    const std::uint64_t seed = parse_seed(args.require("--seed"));
    const std::string out = args.require("--out");
    args.finish();

    const WorldSpec world = load_world_file(world_path);
    const Dataset corpus = simulate_corpus(world, n, seed);
    write_dataset(corpus, out);
    std::cout << "simulated " << corpus.rows << " rows -> " << out << "\n";
    return 0;
}

int cmd_train(Args& args) {
    const std::string schema_path = args.require("--schema");
    const std::string data_path = args.require("--data");
    const std::size_t epochs = parse_count(args.require("--epochs"), "--epochs", 1);
    const std::uint64_t seed = parse_seed(args.require("--seed"));
    const std::string out = args.require("--out");

    Hyper hyper;
    hyper.epochs = epochs;
    if (const auto v = args.optional("--batch")) hyper.batch = parse_count(*v, "--batch", 1);
    if (const auto v = args.optional("--zdim")) hyper.z_dim = parse_count(*v, "--zdim", 1);
    if (const auto v = args.optional("--hidden")) hyper.hidden = parse_count(*v, "--hidden", 1);
    if (const auto v = args.optional("--lambda-cond")) {
        hyper.lambda_cond = parse_real(*v, "--lambda-cond");
        if (hyper.lambda_cond < 0.0) throw UsageError("--lambda-cond must be >= 0");
    }
    if (const auto v = args.optional("--lr-g")) hyper.adam_g.lr = parse_real(*v, "--lr-g");
    if (const auto v = args.optional("--lr-d")) {
        hyper.adam_dm.lr = parse_real(*v, "--lr-d");
        hyper.adam_dkg.lr = hyper.adam_dm.lr;
    }
    if (const auto v = args.optional("--lr-dkg")) hyper.adam_dkg.lr = parse_real(*v, "--lr-dkg");
    if (const auto v = args.optional("--beta2")) {
        const double beta2 = parse_real(*v, "--beta2");
        if (!(beta2 > 0.0 && beta2 < 1.0)) throw UsageError("--beta2 must lie in (0, 1)");
        hyper.adam_g.beta2 = beta2;
        hyper.adam_dm.beta2 = beta2;
        hyper.adam_dkg.beta2 = beta2;
    }
    hyper.kg_on = !args.flag("--no-kg");
    hyper.enforce_condition = args.flag("--enforce-condition");
    hyper.nonsaturating = args.flag("--nonsaturating");
    const bool clamp = args.flag("--clamp");
    const auto log_path = args.optional("--log");
    const auto rules_path = args.optional("--rules");
    args.finish();

    const TableSchema schema = load_schema_file(schema_path);
    const KnowledgeBase kb =
        rules_path ? load_rules_file(*rules_path, schema) : load_rules("", schema);
    const Dataset data = load_csv(data_path, schema, clamp);

    GanModel model = init_model(schema, kb, hyper, seed);
    Rng rng = Rng(seed).fork("train");

    std::ostringstream log;
    const auto log_line = [&](const EpochStats& e) {
        std::ostringstream line;
        char buf[32];
        auto fmt = [&](double v) {
            std::snprintf(buf, sizeof(buf), "%.6g", v);
            return std::string(buf);
        };
        line << e.epoch << '\t' << fmt(e.loss_g) << '\t' << fmt(e.loss_dm) << '\t'
             << (e.loss_dkg ? fmt(*e.loss_dkg) : std::string("-")) << '\t'
             << fmt(e.cond_match) << '\t' << fmt(e.validity_sample) << '\n';
        std::cout << line.str();
        log << line.str();
    };

    train(model, data, rng, log_line);
    save_checkpoint(model, out);
    if (log_path) atomic_write_text(*log_path, log.str());
    std::cout << "checkpoint -> " << out << "\n";
    return 0;
}

int cmd_generate(Args& args) {
    const std::string model_path = args.require("--model");
    const std::size_t n = parse_count(args.require("--n"), "--n");
    const std::uint64_t seed = parse_seed(args.require("--seed"));
    const std::string out = args.require("--out");
    std::vector<std::pair<std::string, std::string>> condition;
    if (const auto v = args.optional("--condition")) condition = parse_condition_flag(*v);
    const bool enforce = args.flag("--enforce-condition");
    args.finish();

    GanModel model = load_checkpoint_embedded(model_path);
    if (enforce) model.hyper.enforce_condition = true;

    Rng rng = Rng(seed).fork("generate");
    GenerationStats stats;
    const Dataset synth = generate(model, n, condition, rng, &stats);
    write_dataset(synth, out);
    std::cout << "generated " << synth.rows << " rows (condition match "
              << stats.cond_match << ") -> " << out << "\n";
    return 0;
}

int cmd_evaluate(Args& args) {
    const std::string schema_path = args.require("--schema");
    const std::string real_path = args.require("--real");
    const std::string synth_path = args.require("--synth");
    const std::string out = args.require("--out");
    const std::uint64_t seed = args.has("--seed") ? parse_seed(args.require("--seed")) : 0;
    const bool clamp = args.flag("--clamp");

    Report report(seed);
    report.add_input("schema", schema_path);
    report.add_input("real", real_path);
    report.add_input("synth", synth_path);

    const TableSchema schema = load_schema_file(schema_path);
    const bool has_rules = args.has("--rules");
    const KnowledgeBase kb = load_optional_rules(args, schema, &report);
    args.finish();

    const Dataset real = load_csv(real_path, schema, clamp);
    const Dataset synth = load_csv(synth_path, schema, clamp);
    const FidelityReport fr = fidelity_report(real, synth, has_rules ? &kb : nullptr);
    report.merge(fr.to_json());
    report.write(out);
    std::cout << "report -> " << out << "\n";
    return 0;
}

int cmd_utility(Args& args) {
    const std::string schema_path = args.require("--schema");
    const std::string synth_path = args.require("--synth-train");
    const std::string train_path = args.require("--real-train");
    const std::string test_path = args.require("--real-test");
    const std::string label = args.require("--label");
    const std::uint64_t seed = parse_seed(args.require("--seed"));
    const std::string out = args.require("--out");
    ClassifierHyper hyper;
    if (const auto v = args.optional("--clf-epochs"))
        hyper.epochs = parse_count(*v, "--clf-epochs", 1);
    if (const auto v = args.optional("--clf-lr")) hyper.lr = parse_real(*v, "--clf-lr");
    args.finish();

    Report report(seed);
    report.add_input("schema", schema_path);
    report.add_input("synth_train", synth_path);
    report.add_input("real_train", train_path);
    report.add_input("real_test", test_path);

    const TableSchema schema = load_schema_file(schema_path);
    const Dataset synth_train = load_csv(synth_path, schema);
    const Dataset real_train = load_csv(train_path, schema);
    const Dataset real_test = load_csv(test_path, schema);

    const UtilityResult result =
        tstr_utility(synth_train, real_train, real_test, label, hyper, seed);
    ordered_json payload = result.to_json();
    payload["label"] = label;
    report.merge(payload);
    report.write(out);
    std::cout << "report -> " << out << "\n";
    return 0;
}

int cmd_attack(Args& args) {
    const std::string type = args.require("--type");
    const std::string schema_path = args.require("--schema");
    const std::uint64_t seed = parse_seed(args.require("--seed"));
    const std::string out = args.require("--out");

    Report report(seed);
    report.add_input("schema", schema_path);
    const TableSchema schema = load_schema_file(schema_path);

    AttackReport result;
    if (type == "reident" || type == "attrib") {
        const std::string real_path = args.require("--real");
        const std::string synth_path = args.require("--synth");
        report.add_input("real", real_path);
        report.add_input("synth", synth_path);
        const Dataset real = load_csv(real_path, schema);
        const Dataset synth = load_csv(synth_path, schema);
        std::vector<std::string> quasi = default_quasi_columns(schema);
        if (const auto v = args.optional("--quasi")) {
            quasi.clear();
            for (auto& name : detail::split(*v, ',')) quasi.push_back(detail::trim(name));
        }
        if (type == "reident") {
            const double overlap = parse_real(args.require("--overlap"), "--overlap");
            args.finish();
            result = reident_attack(real, synth, overlap, quasi, seed);
        } else {
            const std::string sensitive = args.require("--sensitive");
            args.finish();
            result = attribute_inference(real, synth, sensitive, quasi, seed);
        }
    } else if (type == "mia") {
        const std::string mode_text = args.require("--mode");
        const std::string members_path = args.require("--members");
        const std::string nonmembers_path = args.require("--nonmembers");
        report.add_input("members", members_path);
        report.add_input("nonmembers", nonmembers_path);
        const Dataset members = load_csv(members_path, schema);
        const Dataset nonmembers = load_csv(nonmembers_path, schema);
        if (mode_text == "WB") {
            const std::string model_path = args.require("--model");
            report.add_input("model", model_path);
            args.finish();
            const GanModel model = load_checkpoint_embedded(model_path);
            result = membership_inference(&model, nullptr, members, nonmembers,
                                          MiaMode::WhiteBox, seed);
        } else if (mode_text == "FBB") {
            const std::string synth_path = args.require("--synth");
            report.add_input("synth", synth_path);
            args.finish();
            const Dataset synth = load_csv(synth_path, schema);
            result = membership_inference(nullptr, &synth, members, nonmembers,
                                          MiaMode::FullyBlackBox, seed);
        } else {
            throw UsageError("--mode must be WB or FBB");
        }
    } else {
        throw UsageError("--type must be reident, attrib, or mia");
    }

    report.merge(result.to_json());
    report.write(out);
    std::cout << "attack accuracy " << result.accuracy << " (baseline " << result.baseline
              << ") -> " << out << "\n";
    return 0;
}

constexpr const char* kBuiltinSchema = R"(column event categorical motion,lamp_on,tag_sync,flood,scan
column protocol categorical TCP,UDP,ICMP
column src_ip categorical 10.0.0.11,10.0.0.12,10.0.0.13,10.0.0.14,10.0.0.21
column dst_ip categorical 10.0.0.11,10.0.0.12,10.0.0.13,10.0.0.14,10.0.0.21
column dst_port continuous 0 65535
column bytes continuous 64 1500
label event
conditional event,protocol
)";

int cmd_gradcheck(Args& args) {
    const std::uint64_t seed = parse_seed(args.require("--seed"));
    const auto schema_path = args.optional("--schema");
    args.finish();

    const TableSchema schema =
        schema_path ? load_schema_file(*schema_path) : parse_schema(kBuiltinSchema);
    const KnowledgeBase kb = load_rules("", schema);
    const GanModel model = init_model(schema, kb, Hyper{}, seed);
    const Encoder enc(schema);

    Rng rng = Rng(seed).fork("gradcheck");
    const std::size_t batch = 8;
    constexpr double kH = 1e-5;
    constexpr double kTol = 1e-4;

    auto random_matrix = [&](std::size_t rows, std::size_t cols, bool unit_interval) {
        Matrix m(rows, cols);
        for (auto& v : m.a) v = unit_interval ? rng.uniform01() : rng.normal();
        return m;
    };

    bool ok = true;
    const auto check = [&](const char* name, const DenseNet& net, const Matrix& in,
                           const LossFn& loss) {
        const double err = grad_check(net, in, loss, kH, rng.next());
        std::printf("%-10s max relative error %.3g\n", name, err);
        ok = ok && err < kTol;
    };

    {
        Matrix target = random_matrix(batch, enc.row_width(), true);
        for (auto& v : target.a) v = v > 0.5 ? 1.0 : 0.0;
        check("generator", model.generator,
              random_matrix(batch, model.generator.in_dim, false),
              [&](const Matrix& outv) { return bce_loss(outv, target); });
    }
    {
        Matrix target(batch, 1);
        for (std::size_t b = 0; b < batch; ++b) target.at(b, 0) = b % 2 ? 1.0 : 0.0;
        const auto loss = [&](const Matrix& outv) { return bce_loss(outv, target); };
        check("disc_data", model.disc_data,
              random_matrix(batch, model.disc_data.in_dim, true), loss);
        check("disc_kg", model.disc_kg,
              random_matrix(batch, model.disc_kg.in_dim, true), loss);
    }
    {
        const std::size_t classes =
            schema.columns[static_cast<std::size_t>(schema.label_index())].cardinality();
        const std::size_t features = enc.row_width() - classes;
        const DenseNet clf = init_net({features, classes},
                                      {ActSpec::block_softmax({{classes, true}})}, seed + 1);
        Matrix target(batch, classes);
        for (std::size_t b = 0; b < batch; ++b) target.at(b, rng.uniform_index(classes)) = 1.0;
        check("classifier", clf, random_matrix(batch, features, true),
              [&](const Matrix& outv) { return cross_entropy_loss(outv, target); });
    }

    std::printf("gradcheck %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 2;
}

}  // namespace

int run(const std::vector<std::string>& argv) {
    if (argv.empty()) {
        std::cerr << kUsage;
        return 1;
    }
    try {
        Args args = parse_args(argv);
        if (args.subcommand == "sim") return cmd_sim(args);
        if (args.subcommand == "train") return cmd_train(args);
        if (args.subcommand == "generate") return cmd_generate(args);
        if (args.subcommand == "evaluate") return cmd_evaluate(args);
        if (args.subcommand == "utility") return cmd_utility(args);
        if (args.subcommand == "attack") return cmd_attack(args);
        if (args.subcommand == "gradcheck") return cmd_gradcheck(args);
        throw UsageError("unknown subcommand '" + args.subcommand + "'");
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << kUsage;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace kinetgan::cli
