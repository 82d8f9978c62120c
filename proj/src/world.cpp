#include "kinetgan/world.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "kinetgan/rng.hpp"
#include "parse_util.hpp"

namespace kinetgan {

using detail::content_lines;
using detail::fail_at;
using detail::parse_double;
using detail::split;
using detail::split_ws;
using detail::trim;

namespace {

std::string resolve(const std::string& base_dir, const std::string& rel) {
    std::filesystem::path p(rel);
    if (p.is_absolute() || base_dir.empty()) return rel;
    return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

WorldSpec parse_world(const std::string& text, const std::string& base_dir) {
    WorldSpec world;
    std::string schema_rel;
    std::vector<std::pair<std::string, double>> events;
    struct RawSampler {
        int line;
        std::string event, column;
        std::vector<std::string> args;
    };
    std::vector<RawSampler> raw;

    for (const auto& [line_no, line] : content_lines(text)) {
        const auto tok = split_ws(line);
        if (tok[0] == "schema") {
            if (tok.size() != 2) fail_at("malformed schema directive", line_no);
            if (!schema_rel.empty()) fail_at("duplicate schema directive", line_no);
            schema_rel = tok[1];
        } else if (tok[0] == "rules") {
            if (tok.size() != 2) fail_at("malformed rules directive", line_no);
            world.rules_path = resolve(base_dir, tok[1]);
        } else if (tok[0] == "event") {
            if (tok.size() != 3) fail_at("malformed event declaration", line_no);
            double p = 0.0;
            if (!parse_double(tok[2], &p) || p < 0.0)
                fail_at("bad event probability", line_no);
            events.emplace_back(tok[1], p);
        } else if (tok[0] == "sampler") {
            if (tok.size() < 5) fail_at("malformed sampler declaration", line_no);
            raw.push_back({line_no, tok[1], tok[2], {tok.begin() + 3, tok.end()}});
        } else {
            fail_at("unknown directive '" + tok[0] + "'", line_no);
        }
    }

    if (schema_rel.empty()) throw Error("world file missing schema directive");
    world.schema_path = resolve(base_dir, schema_rel);
    world.schema = load_schema_file(world.schema_path);

    const int label = world.schema.label_index();
    if (label < 0) throw Error("world schema must declare a label column");
    const auto& label_col = world.schema.columns[static_cast<std::size_t>(label)];

    world.mixture.assign(label_col.cardinality(), 0.0);
    for (const auto& [name, p] : events) {
        const int idx = label_col.category_index(name);
        if (idx < 0) throw Error("event '" + name + "' is not a category of " + label_col.name);
        world.mixture[static_cast<std::size_t>(idx)] = p;
    }
    const double total = std::accumulate(world.mixture.begin(), world.mixture.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9)
        throw Error("event mixture sums to " + std::to_string(total) + ", expected 1");

    world.samplers.assign(label_col.cardinality(),
                          std::vector<ColumnSampler>(world.schema.columns.size()));

    for (const auto& rs : raw) {
        const int ev = label_col.category_index(rs.event);
        if (ev < 0) fail_at("sampler for undeclared event '" + rs.event + "'", rs.line);
        const int col = world.schema.column_index(rs.column);
        if (col < 0) fail_at("sampler for unknown column '" + rs.column + "'", rs.line);
        if (col == label) fail_at("label column takes no sampler", rs.line);
        const auto& spec = world.schema.columns[static_cast<std::size_t>(col)];
        ColumnSampler s;
        if (rs.args[0] == "cat") {
            if (!spec.is_categorical()) fail_at("cat sampler on continuous column", rs.line);
            if (rs.args.size() != 2) fail_at("malformed cat sampler", rs.line);
            s.kind = ColumnSampler::Kind::Weighted;
            s.weights.assign(spec.cardinality(), 0.0);
            double total_w = 0.0;
            for (const auto& pair : split(rs.args[1], ',')) {
                const auto colon = pair.find(':');
                if (colon == std::string::npos) fail_at("cat weights need v:w pairs", rs.line);
                const std::string v = trim(pair.substr(0, colon));
                double w = 0.0;
                if (!parse_double(trim(pair.substr(colon + 1)), &w) || w < 0.0)
                    fail_at("bad category weight", rs.line);
                const int idx = spec.category_index(v);
                if (idx < 0) fail_at("unknown category '" + v + "'", rs.line);
                s.weights[static_cast<std::size_t>(idx)] = w;
                total_w += w;
            }
            if (total_w <= 0.0) fail_at("category weights sum to zero", rs.line);
            for (auto& w : s.weights) w /= total_w;
        } else if (rs.args[0] == "norm") {
            if (spec.is_categorical()) fail_at("norm sampler on categorical column", rs.line);
            if (rs.args.size() != 3 && rs.args.size() != 5)
                fail_at("malformed norm sampler", rs.line);
            s.kind = ColumnSampler::Kind::ClippedNormal;
            if (!parse_double(rs.args[1], &s.mean) || !parse_double(rs.args[2], &s.stddev) ||
                s.stddev < 0.0)
                fail_at("bad norm parameters", rs.line);
            s.clip_lo = spec.lo;
            s.clip_hi = spec.hi;
            if (rs.args.size() == 5) {
                if (!parse_double(rs.args[3], &s.clip_lo) || !parse_double(rs.args[4], &s.clip_hi))
                    fail_at("bad clip bounds", rs.line);
            }
            if (s.clip_lo < spec.lo || s.clip_hi > spec.hi || s.clip_lo > s.clip_hi)
                fail_at("clip bounds outside column bounds", rs.line);
        } else {
            fail_at("unknown sampler kind '" + rs.args[0] + "'", rs.line);
        }
        s.configured = true;
        world.samplers[static_cast<std::size_t>(ev)][static_cast<std::size_t>(col)] = s;
    }

    // Full coverage: every positive-probability event samples every non-label column.
    for (std::size_t ev = 0; ev < world.mixture.size(); ++ev) {
        if (world.mixture[ev] == 0.0) continue;
        for (std::size_t c = 0; c < world.schema.columns.size(); ++c) {
            if (static_cast<int>(c) == label) continue;
            if (!world.samplers[ev][c].configured)
                throw Error("event '" + label_col.categories[ev] + "' has no sampler for column '" +
                            world.schema.columns[c].name + "'");
        }
    }
    return world;
}

WorldSpec load_world_file(const std::string& path) {
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_world(read_text_file(path), dir);
}

Dataset simulate_corpus(const WorldSpec& world, std::size_t n, std::uint64_t seed) {
    Dataset ds;
    ds.schema = world.schema;
    const int label = world.schema.label_index();

    std::vector<double> cum(world.mixture.size());
    std::partial_sum(world.mixture.begin(), world.mixture.end(), cum.begin());

    Rng rng(seed);
    std::vector<double> row(world.schema.columns.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        std::size_t ev = 0;
        while (ev + 1 < cum.size() && u >= cum[ev]) ++ev;
        row[static_cast<std::size_t>(label)] = static_cast<double>(ev);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (static_cast<int>(c) == label) continue;
            const auto& s = world.samplers[ev][c];
            if (s.kind == ColumnSampler::Kind::Weighted) {
                const double w = rng.uniform01();
                double acc = 0.0;
                std::size_t pick = 0;
                for (std::size_t k = 0; k < s.weights.size(); ++k) {
                    acc += s.weights[k];
                    if (w < acc || k + 1 == s.weights.size()) {
                        pick = k;
                        break;
                    }
                }
                row[c] = static_cast<double>(pick);
            } else {
                const double v = s.mean + s.stddev * rng.normal();
                row[c] = std::clamp(v, s.clip_lo, s.clip_hi);
            }
        }
        ds.push_row(row);
    }
    return ds;
}

}  // namespace kinetgan
